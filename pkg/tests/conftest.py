import numpy as np
import pytest

from helikon.solver import continue_family, solve_k


# solved family values are re-derived once per session and shared; the
# frozen reference table below pins regressions at 1e-7
FROZEN = {
    1.0: (1.9074993764668093, 0.6290650538473181),
    1.5: (1.8005459480059014, 0.7407229482296983),
    2.0: (1.7628837528045178, 0.8019304703620356),
    2.5: (1.7453404188469337, 0.8401285091063906),
    3.0: (1.7357729938519915, 0.8661140126785549),
    4.0: (1.726230170250728, 0.8990831771041654),
}


@pytest.fixture(scope="session")
def solved_family():
    sols = {1.0: solve_k(1.0)}
    ks = [1.5, 2.0, 2.5, 3.0, 4.0]
    for sol in continue_family(ks, theta_bracket=(1.70, 1.84)):
        sols[sol.k] = sol
    return sols


@pytest.fixture(scope="session")
def h1(solved_family):
    return solved_family[1.0]


@pytest.fixture
def rng():
    return np.random.default_rng(7)
