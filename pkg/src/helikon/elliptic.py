"""Odd Jacobi theta function on a lattice {1, tau} and products of its translates.

The function implemented here is

    theta(z) = sum_n exp(pi*i*tau*(n+1/2)^2 + 2*pi*i*(n+1/2)*(z+1/2)),

the odd theta with a simple zero at every lattice point and no other zeros.
It satisfies

    theta(z + 1)   = -theta(z)
    theta(z + tau) = -exp(-pi*i*tau - 2*pi*i*z) * theta(z)
                   =  exp(-2*pi*i*(z + (tau+1)/2)) * theta(z)
    theta(-z)      = -theta(z)

Balanced products of translates (equal exponent sums upstairs and down) are
therefore 1-periodic on the nose, which is what every consumer in this
package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI_I = 2j * np.pi

# Truncation: drop terms once they are this small relative to the partial sum.
_TERM_CUTOFF = 1e-16
_MIN_HALF_WIDTH = 8


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class PoleError(ArithmeticError):
    """Evaluation at (or too close to) a pole or zero where a log is needed."""


class ContractError(ValueError):
    """Caller violated a structural precondition (e.g. unbalanced exponents)."""


@dataclass(frozen=True)
class Lattice:
    """Lattice {1, tau} with Im(tau) > 0; `rhombic` additionally asserts |tau|=1."""

    tau: complex
    rhombic: bool = False

    def __post_init__(self):
        if not np.imag(self.tau) > 0:
            raise DomainError(f"Im(tau) must be positive, got tau={self.tau}")
        if self.rhombic and abs(abs(self.tau) - 1.0) > 1e-12:
            raise DomainError(f"rhombic lattice needs |tau|=1, got |tau|={abs(self.tau)}")


@dataclass(frozen=True)
class ThetaFactor:
    """One factor theta(z - shift)^exponent of a theta product.

    Positive exponents contribute zeros at `shift` (mod the lattice),
    negative exponents contribute poles.
    """

    shift: complex
    exponent: float

    def __post_init__(self):
        if not np.isfinite(self.exponent):
            raise ContractError("factor exponent must be finite")


def _half_width(z, lattice: Lattice) -> int:
    """Summation half-width N so the first omitted term is negligible.

    Terms decay like exp(-pi*Im(tau)*(n+1/2)^2 + 2*pi*(n+1/2)*|Im z|); the
    peak sits near |n+1/2| = |Im z|/Im(tau) and beyond it the decay is
    Gaussian, so a fixed margin past the peak suffices for 1e-16 relative.
    """
    y = np.imag(lattice.tau)
    m = float(np.max(np.abs(np.imag(np.atleast_1d(z))))) if np.size(z) else 0.0
    peak = m / y
    margin = np.sqrt((40.0 + 2.0 * np.pi * m * peak) / (np.pi * y)) + 1.0
    return max(_MIN_HALF_WIDTH, int(np.ceil(peak + margin)))


def _theta_terms(z, lattice: Lattice, nmax: int):
    z = np.asarray(z, dtype=complex)
    half = np.arange(-nmax, nmax + 1, dtype=float) + 0.5
    expo = (1j * np.pi * lattice.tau) * half[:, None] ** 2 \
        + TWO_PI_I * half[:, None] * (z.ravel()[None, :] + 0.5)
    return half, np.exp(expo), z.shape


def theta(z, lattice: Lattice):
    """theta(z, tau), vectorized over z.

    The series is summed over n in [-N, N] with N chosen adaptively; doubling
    N changes the result by < 1e-14 relative (the tail is Gaussian).
    """
    nmax = _half_width(z, lattice)
    _, terms, shape = _theta_terms(z, lattice, nmax)
    vals = terms.sum(axis=0)
    # adaptive guard: the edge terms must be negligible against the result
    edge = np.abs(terms[0]) + np.abs(terms[-1])
    scale = np.maximum(np.abs(vals), np.max(np.abs(terms), axis=0) * 1e-3)
    if np.any(edge > _TERM_CUTOFF * scale):
        _, terms, shape = _theta_terms(z, lattice, 2 * nmax)
        vals = terms.sum(axis=0)
    return vals.reshape(shape) if shape else complex(vals[0])


def theta_quasi_factor(z, lattice: Lattice):
    """Multiplier q(z) with theta(z + tau) = q(z) * theta(z).

    q(z) = exp(-2*pi*i*(z + (tau+1)/2)).  (The exponent really is negative:
    with the series above, the positive-exponent variant would force a
    negative zero count per fundamental domain.)
    """
    z = np.asarray(z, dtype=complex)
    out = np.exp(-TWO_PI_I * (z + (lattice.tau + 1.0) / 2.0))
    return out if out.shape else complex(out)


def log_theta_derivative(z, lattice: Lattice):
    """theta'(z)/theta(z) by term-differentiated series; simple pole at lattice points."""
    nmax = _half_width(z, lattice)
    half, terms, shape = _theta_terms(z, lattice, nmax)
    den = terms.sum(axis=0)
    num = (TWO_PI_I * half[:, None] * terms).sum(axis=0)
    scale = np.max(np.abs(terms), axis=0)
    if np.any(np.abs(den) < 1e-13 * scale):
        raise PoleError("log derivative evaluated at a zero of theta")
    out = num / den
    return out.reshape(shape) if shape else complex(out[0])


def theta_product(z, factors: list[ThetaFactor], lattice: Lattice):
    """Principal-branch product of theta(z - a_i)^{alpha_i} over the factors.

    Zero/pole exponent sums must balance (otherwise the product cannot be
    lattice-compatible and the call is rejected).  Values are computed as
    exp(sum alpha_i Log theta(z - a_i)) with principal logs at the evaluation
    point; continuity along paths is the continuation machinery's job, not
    this function's.
    """
    balance = sum(f.exponent for f in factors)
    if abs(balance) > 1e-12:
        raise ContractError(f"theta product exponents must sum to zero, got {balance}")
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape if z.shape else (1,), dtype=complex)
    for f in factors:
        tv = np.atleast_1d(theta(z - f.shift, lattice))
        if np.any(np.abs(tv) < 1e-13):
            raise PoleError(f"theta product evaluated at a zero/pole site {f.shift}")
        acc = acc + f.exponent * np.log(tv)
    out = np.exp(acc)
    return out.reshape(z.shape) if z.shape else complex(out[0])
