"""Screw-motion-invariant genus-one helicoids from theta-function data."""

__version__ = "1.0.0"

from .elliptic import Lattice, ThetaFactor, theta, theta_product, theta_quasi_factor
from .solver import Solution, continue_family, solve_k, solve_vertical_for_b, sweep
from .torus import MarkedPoints, RhombicTorus, make_torus, place_points
from .weierstrass import WeierstrassData, build_data, data_for, helicoid_data

__all__ = [
    "Lattice", "ThetaFactor", "theta", "theta_product", "theta_quasi_factor",
    "RhombicTorus", "MarkedPoints", "make_torus", "place_points",
    "WeierstrassData", "build_data", "data_for", "helicoid_data",
    "Solution", "solve_k", "solve_vertical_for_b", "continue_family", "sweep",
    "__version__",
]
