"""Flat cone metrics: angle ledgers, model line elements, length integrals.

Cone points carry the angle multiple k (cone angle 2*pi*k); exponential
points of simple type carry no angle.  The admissibility bookkeeping is

    sum k_i = -(2 - 2*genus) + r + 2*l

with r finite points and l exponential ones (l = 0 recovers the classical
closed-surface count).  Metrics here are descriptions plus line-element
evaluators, not atlases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .elliptic import DomainError

AT_INFINITY = "infinity"

_GX, _GW = leggauss(48)


@dataclass(frozen=True)
class ConePoint:
    position: object                    # complex or AT_INFINITY
    kind: str = "finite"                # "finite" | "exponential_simple"
    angle_multiple: float | None = None

    def __post_init__(self):
        if self.kind == "finite":
            if self.angle_multiple is None or self.angle_multiple == 0.0:
                raise DomainError("finite cone point needs a nonzero angle multiple")
        elif self.kind == "exponential_simple":
            if self.angle_multiple is not None:
                raise DomainError("exponential cone points carry no angle")
        else:
            raise DomainError(f"unknown cone point kind {self.kind!r}")


def finite_point(position, k: float) -> ConePoint:
    return ConePoint(position=position, kind="finite", angle_multiple=float(k))


def exp_point(position) -> ConePoint:
    return ConePoint(position=position, kind="exponential_simple")


@dataclass(frozen=True)
class ConeMetricDesc:
    genus: int
    points: tuple

    def finite_multiples(self):
        return [p.angle_multiple for p in self.points if p.kind == "finite"]

    def n_exponential(self) -> int:
        return sum(1 for p in self.points if p.kind == "exponential_simple")


def gauss_bonnet_defect(desc: ConeMetricDesc) -> float:
    """sum(k_i) minus the admissible total; zero iff the ledger closes."""
    ks = desc.finite_multiples()
    r = len(ks)
    ell = desc.n_exponential()
    return float(sum(ks) - (-(2 - 2 * desc.genus) + r + 2 * ell))


# canonical ledgers used throughout the tests ------------------------------


def sphere_dz_ledger() -> ConeMetricDesc:
    """|dz| on the sphere: one cone point of angle -2*pi at infinity."""
    return ConeMetricDesc(genus=0, points=(finite_point(AT_INFINITY, -1.0),))


def t1_slit_ledger() -> ConeMetricDesc:
    """Slit-plane torus: 6*pi at the vertex, -2*pi at the double pole."""
    return ConeMetricDesc(genus=1, points=(finite_point(0.0, 3.0),
                                           finite_point(AT_INFINITY, -1.0)))


def tkd_ledger(k: float, d: float = 1.0) -> ConeMetricDesc:
    """Torus with a sector of angle 2*pi*(k-1) sewn in along a ray to infinity.

    Sewing adds (k-1) at the finite endpoint and subtracts it at infinity,
    so the angles are 6*pi at the vertex, 2*pi*k at i*d, and -2*pi*k at
    infinity -- the only combination the sewing arithmetic and the angle
    count both accept.
    """
    return ConeMetricDesc(genus=1, points=(finite_point(0.0, 3.0),
                                           finite_point(1j * d, float(k)),
                                           finite_point(AT_INFINITY, -float(k))))


# model line elements -------------------------------------------------------


def sk_line_element(k, w) -> np.ndarray:
    """Density of the spread-out sector metric |(1+w/k)^{k-1} dw| per |dw|.

    k = math.inf gives the limiting exponential-cone density |e^w|.
    """
    w = np.asarray(w, dtype=complex)
    if k == math.inf:
        out = np.abs(np.exp(w))
        return out if out.shape else float(out)
    if k == 0:
        raise DomainError("k = 0 has no sector line element in this chart")
    base = 1.0 + w / k
    if np.any(base == 0.0):
        raise DomainError("line element evaluated at the cone point w = -k")
    out = np.abs(base) ** (k - 1.0)
    return out if out.shape else float(out)


def sk_limit_sup_error(k: float, box_radius: float = 2.0, n: int = 81) -> float:
    """sup over |w| <= box_radius of |density_k - density_inf| on a grid."""
    x = np.linspace(-box_radius, box_radius, n)
    X, Y = np.meshgrid(x, x)
    W = X + 1j * Y
    mask = np.abs(W) <= box_radius
    dk = sk_line_element(k, W[mask])
    di = sk_line_element(math.inf, W[mask])
    return float(np.max(np.abs(dk - di)))


# length integrals of the two-pole example metric ---------------------------


def _mu_beta_density(t: np.ndarray, beta: float) -> np.ndarray:
    return np.abs((t + 1.0) / (t - 1.0) * (t + 2.0) / (t - 2.0)) * np.exp(beta * t)


def mu_beta_lengths(beta: float) -> dict:
    """Lengths f = len(-inf, -2] and g = len[-2, -1] in the metric
    |(z+1)/(z-1) (z+2)/(z-2) e^{beta z} dz| along the real axis.

    The improper integral is extended left until the next block contributes
    less than 1e-12 of the accumulated value (the integrand decays like
    e^{beta t}, so the thrown-away tail is geometrically bounded).
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")

    def block(a: float, b: float) -> float:
        t = 0.5 * (a + b) + 0.5 * (b - a) * _GX
        return float(np.sum(_GW * _mu_beta_density(t, beta)) * 0.5 * (b - a))

    g_val = block(-2.0, -1.0)

    f_val = 0.0
    right = -2.0
    width = 2.0
    while True:
        left = right - width
        piece = block(left, right)
        f_val += piece
        right = left
        width *= 1.4
        if piece < 1e-12 * f_val and -right > 12.0 / beta:
            break
        if -right > 1e8:
            break
    return {"f": f_val, "g": g_val}


def mu_beta_g_bound(beta: float) -> float:
    """The elementary upper bound (e^{-beta} - e^{-2 beta})/beta for g."""
    return (math.exp(-beta) - math.exp(-2.0 * beta)) / beta


# conformal modulus ---------------------------------------------------------


def annulus_modulus(r1: float, r2: float) -> float:
    """log(r2/r1); the core-curve extremal length is its reciprocal."""
    if not 0 < r1 < r2:
        raise DomainError(f"need 0 < r1 < r2, got ({r1}, {r2})")
    return math.log(r2 / r1)


def core_extremal_length(r1: float, r2: float) -> float:
    return 1.0 / annulus_modulus(r1, r2)


# developing map -------------------------------------------------------------


def develop_segment(form, vertices, panels: int = 64) -> complex:
    """F(end) - F(start) for the developing map F = integral of the form.

    `form` maps complex points to the form's density per dz; `vertices` is a
    polyline (straight pieces are exact for the intended uses).
    """
    total = 0.0 + 0.0j
    for a, b in zip(vertices[:-1], vertices[1:]):
        j = np.arange(panels, dtype=float)
        mid = (j + 0.5) / panels
        t = (mid[:, None] + (0.5 / panels) * _GX[None, :]).ravel()
        w = np.broadcast_to(_GW[None, :] * (0.5 / panels), (panels, _GX.size)).ravel()
        total += np.sum(w * form(a + (b - a) * t)) * (b - a)
    return complex(total)


def develop_circle(form, center: complex, radius: float, n: int = 256) -> complex:
    """Development increment around a full circle (counterclockwise)."""
    phi = np.pi * (np.polynomial.legendre.leggauss(n)[0] + 1.0)
    w = np.polynomial.legendre.leggauss(n)[1] * np.pi
    z = center + radius * np.exp(1j * phi)
    return complex(np.sum(form(z) * 1j * radius * np.exp(1j * phi) * w))
