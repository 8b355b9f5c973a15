import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helikon.elliptic import (ContractError, DomainError, Lattice, PoleError,
                              ThetaFactor, log_theta_derivative, theta,
                              theta_product, theta_quasi_factor)

TAU_I = Lattice(1j)
TAU_17 = Lattice(complex(np.exp(1.7j)), rhombic=True)

# frozen 200-term direct-summation oracle at 40 digits (mpmath):
#   sum over n in [-200, 200] of exp(pi*i*tau*(n+1/2)^2 + 2*pi*i*(n+1/2)*(z+1/2))
THETA_03_02I = -0.88642549836619559 - 0.36458120244320944j


def test_lattice_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        Lattice(-1j)
    with pytest.raises(DomainError):
        Lattice(1.0 + 0j)


def test_rhombic_flag_asserts_unit_modulus():
    with pytest.raises(DomainError):
        Lattice(0.5 + 0.8j, rhombic=True)
    Lattice(complex(np.exp(2.0j)), rhombic=True)


def test_theta_vanishes_at_origin():
    assert abs(theta(0.0 + 0j, TAU_I)) < 1e-14


def test_theta_matches_reference_summation():
    assert abs(theta(0.3 + 0.2j, TAU_I) - THETA_03_02I) < 1e-13


def test_theta_against_brute_force(rng):
    # truncation independence: a very wide plain sum agrees to 1e-14 relative
    for _ in range(10):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        lat = Lattice(complex(rng.uniform(-0.4, 0.4), rng.uniform(0.5, 2.0)))
        n = np.arange(-400, 401)
        half = n + 0.5
        brute = np.exp(1j * np.pi * lat.tau * half ** 2
                       + 2j * np.pi * half * (z + 0.5)).sum()
        assert abs(theta(z, lat) - brute) < 1e-14 * abs(brute)


def test_theta_is_antiperiodic_in_one(rng):
    # theta(z + 1) = -theta(z); balanced products then have period one
    for _ in range(50):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        t0 = theta(z, TAU_17)
        assert abs(theta(z + 1, TAU_17) + t0) < 1e-12 * abs(t0)


def test_quasi_factor_identity(rng):
    for _ in range(100):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        lhs = theta(z + TAU_17.tau, TAU_17)
        rhs = theta_quasi_factor(z, TAU_17) * theta(z, TAU_17)
        assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_quasi_factor_special_points():
    # direct substitution into exp(-2*pi*i*(z + (tau+1)/2))
    assert abs(theta_quasi_factor(0.0 + 0j, TAU_I) - (-np.exp(np.pi))) < 1e-12 * np.exp(np.pi)
    z = -(TAU_I.tau + 1) / 2
    assert abs(theta_quasi_factor(z, TAU_I) - 1.0) < 1e-14


def test_oddness(rng):
    for _ in range(100):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        t0 = theta(z, TAU_17)
        assert abs(theta(-z, TAU_17) + t0) < 1e-12 * abs(t0)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-1, 1), y=st.floats(-1, 1),
       re_tau=st.floats(-0.45, 0.45), im_tau=st.floats(0.5, 2.0))
def test_identities_property(x, y, re_tau, im_tau):
    lat = Lattice(complex(re_tau, im_tau))
    z = complex(x, y)
    lattice_pts = np.array([m + n * lat.tau for m in range(-2, 3) for n in range(-2, 3)])
    if min(np.abs(z - lattice_pts).min(),
           np.abs(z + lat.tau - lattice_pts).min()) < 1e-2:
        return              # relative accuracy degrades right at the zero set
    t0 = theta(z, lat)
    assert abs(theta(z + 1, lat) + t0) < 1e-12 * abs(t0)
    assert abs(theta(-z, lat) + t0) < 1e-12 * abs(t0)
    t1 = theta(z + lat.tau, lat)
    assert abs(t1 - theta_quasi_factor(z, lat) * t0) < 1e-12 * max(abs(t1), abs(t0))


def test_no_spurious_zeros():
    # |theta| on a fundamental-domain grid, away from the lattice points
    lat = TAU_17
    x = np.linspace(0, 1, 100, endpoint=False)
    X, Y = np.meshgrid(x, x)
    Z = X + Y * lat.tau
    corners = np.array([0, 1, lat.tau, 1 + lat.tau])
    d = np.min(np.abs(Z.ravel()[:, None] - corners[None, :]), axis=1)
    vals = np.abs(theta(Z.ravel(), lat))
    assert vals[d > 0.1].min() > 0.05


def test_log_derivative_odd_and_fd(rng):
    for _ in range(20):
        z = complex(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9))
        v = log_theta_derivative(z, TAU_17)
        assert abs(log_theta_derivative(-z, TAU_17) + v) < 1e-10 * abs(v)
        h = 1e-5
        fd = (np.log(theta(z + h, TAU_17)) - np.log(theta(z - h, TAU_17))) / (2 * h)
        assert abs(v - fd) < 1e-8 * max(1.0, abs(v))


def test_log_derivative_simple_zero_model():
    z = 1e-3 + 0j
    assert abs(log_theta_derivative(z, TAU_I) - 1.0 / z) < 0.01 * abs(1.0 / z)


def test_theta_product_empty():
    assert theta_product(0.37 + 0.21j, [], TAU_I) == 1.0


def test_theta_product_integer_exponents(rng):
    factors = [ThetaFactor(0.3 + 0.1j, 2.0), ThetaFactor(0.1 - 0.2j, 1.0),
               ThetaFactor(-0.4 + 0.3j, -3.0)]
    for _ in range(20):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        direct = (theta(z - factors[0].shift, TAU_17) ** 2
                  * theta(z - factors[1].shift, TAU_17)
                  / theta(z - factors[2].shift, TAU_17) ** 3)
        v = theta_product(z, factors, TAU_17)
        assert abs(v - direct) < 1e-12 * abs(direct)


def test_theta_product_periodicity(rng):
    factors = [ThetaFactor(0.25, 1.0), ThetaFactor(0.5 + 0.2j, -1.0)]
    for _ in range(20):
        z = complex(rng.uniform(-1, 1), rng.uniform(0.0, 0.4))
        r = theta_product(z + 1, factors, TAU_17) / theta_product(z, factors, TAU_17)
        assert abs(r - 1.0) < 1e-12


def test_theta_product_contract_and_pole():
    with pytest.raises(ContractError):
        theta_product(0.3, [ThetaFactor(0.0, 1.0)], TAU_I)
    with pytest.raises(PoleError):
        theta_product(0.25, [ThetaFactor(0.25, 1.0), ThetaFactor(0.5, -1.0)], TAU_I)
