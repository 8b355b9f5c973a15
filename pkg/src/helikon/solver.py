"""Nested bisection for the two period conditions, family continuation, sweeps.

Inner stage: for fixed twist k and torus angle, the vertical residual is a
function of the end placement b; it is bracketed and bisected.  Outer stage:
the horizontal residual evaluated along the curve b(theta) changes sign at
the solution angle.  The nesting mirrors the two-stage structure of the
underlying existence argument and is robust near the degenerate endpoints.
"""

from __future__ import annotations

import concurrent.futures as _fut
from dataclasses import dataclass, field

import numpy as np

from .periods import (PeriodReport, cross_check_hpc, horizontal_residual,
                      integrate_gdh, frozen_cycles, period_report, vertical_residual)
from .weierstrass import AccuracyError, data_for


def _illinois(f, lo, hi, flo, fhi, xtol, maxit=80):
    """Bracketing Illinois iteration; deterministic, keeps the bracket."""
    side = 0
    for _ in range(maxit):
        if hi - lo < xtol:
            break
        mid = (flo * hi - fhi * lo) / (flo - fhi)
        if not lo + 0.1 * xtol < mid < hi - 0.1 * xtol:
            mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = mid, fm
            if side == 1:
                flo *= 0.5
            side = 1
    return 0.5 * (lo + hi)


class NoSignChange:
    """Sentinel: the residual has one sign across the whole bracket."""

    def __init__(self, lo, hi, flo, fhi):
        self.bracket = (lo, hi)
        self.values = (flo, fhi)

    def __repr__(self):
        return f"NoSignChange(bracket={self.bracket}, values={self.values})"


class SolveFailure(RuntimeError):
    """Outer stage found no root; carries the scanned residual table."""

    def __init__(self, message, scan_table):
        super().__init__(message)
        self.scan_table = scan_table


@dataclass
class Solution:
    k: float
    theta_angle: float
    b: float
    a: float
    horiz_residual: float
    vert_residual: float
    iterations: int
    report: PeriodReport

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "theta": self.theta_angle,
            "b": self.b,
            "a": self.a,
            "horiz_residual": self.horiz_residual,
            "vert_residual": self.vert_residual,
            "iterations": self.iterations,
            "report": self.report.as_dict(),
        }


def default_b_bracket(k: float) -> tuple[float, float]:
    lo = max(0.5, (k - 1.0) / k) + 1e-3
    return (lo, 1.0 - 1e-3)


DEFAULT_THETA_BRACKET = (1.2, 2.2)


def solve_vertical_for_b(k: float, theta_angle: float,
                         bracket: tuple[float, float] | None = None,
                         tol_b: float = 1e-10, tol_v: float = 1e-9):
    """Root of the vertical residual in b, or NoSignChange for the bracket."""
    if bracket is None:
        bracket = default_b_bracket(k)
    lo, hi = bracket

    def f(b):
        return vertical_residual(data_for(theta_angle, k, b))

    flo, fhi = f(lo), f(hi)
    if (flo < 0) == (fhi < 0):
        return NoSignChange(lo, hi, flo, fhi)
    return _illinois(f, lo, hi, flo, fhi, xtol=tol_b)


def _scan_outer(k, theta_bracket, b_bracket, n_scan, tol_b):
    """Residual table over theta; rows (theta, b, horiz, vert) with b solved."""
    rows = []
    for th in np.linspace(theta_bracket[0], theta_bracket[1], n_scan):
        b = solve_vertical_for_b(k, float(th), b_bracket, tol_b=tol_b)
        if isinstance(b, NoSignChange):
            rows.append((float(th), None, None, None))
            continue
        d = data_for(float(th), k, b)
        rows.append((float(th), b, horizontal_residual(d), vertical_residual(d)))
    return rows


def solve_k(k: float, theta_bracket: tuple[float, float] | None = None,
            b_bracket: tuple[float, float] | None = None,
            tol_h: float = 1e-6, tol_v: float = 1e-6,
            tol_theta: float = 5e-12, n_scan: int = 13) -> Solution:
    """Locate the solution (theta, b) for a fixed twist k.

    The outer bracket is scanned first (the horizontal residual along b(theta)
    need not change sign at the bracket endpoints); the first sign-change
    subinterval is then bisected.
    """
    if k <= 0.5:
        raise ValueError(f"twist parameter must exceed 1/2, got {k}")
    if theta_bracket is None:
        theta_bracket = DEFAULT_THETA_BRACKET
    if b_bracket is None:
        b_bracket = default_b_bracket(k)

    rows = _scan_outer(k, theta_bracket, b_bracket, n_scan, tol_b=1e-9)
    usable = [(th, b, h) for th, b, h, _ in rows if b is not None]
    pairs = [((th1, h1), (th2, h2))
             for (th1, b1, h1), (th2, b2, h2) in zip(usable[:-1], usable[1:])
             if (h1 < 0) != (h2 < 0)]
    if not pairs:
        raise SolveFailure(f"horizontal residual does not change sign on "
                           f"theta bracket {theta_bracket} for k={k}", rows)

    iters = 0

    def H(th):
        nonlocal iters
        b = solve_vertical_for_b(k, th, b_bracket, tol_b=1e-11)
        if isinstance(b, NoSignChange):
            raise SolveFailure(f"vertical bracket lost at theta={th}", rows)
        iters += 1
        return horizontal_residual(data_for(th, k, b)), b

    best = None
    for (lo, flo), (hi, fhi) in pairs:
        theta_star = _illinois(lambda th: H(th)[0], lo, hi, flo, fhi, xtol=tol_theta)
        b_star = solve_vertical_for_b(k, theta_star, b_bracket, tol_b=1e-12)
        data = data_for(theta_star, k, b_star)
        # a ratio zero can be a phase-pi artifact; the conjugate-equality
        # cross-check vanishes only at the genuine solution
        b1, _ = frozen_cycles(data)
        p1, _ = integrate_gdh(data, b1)
        if cross_check_hpc(data) < 1e-3 * abs(p1):
            best = (theta_star, b_star, data)
            break
    if best is None:
        raise SolveFailure(f"every ratio zero in {theta_bracket} fails the "
                           f"conjugate-equality cross-check (k={k})", rows)

    theta_star, b_star, data = best
    rep = period_report(data)
    sol = Solution(k=float(k), theta_angle=float(theta_star), b=float(b_star),
                   a=float(k * (1.0 - b_star)),
                   horiz_residual=rep.horiz_residual,
                   vert_residual=rep.vert_residual,
                   iterations=iters, report=rep)
    if abs(sol.horiz_residual) > tol_h or abs(sol.vert_residual) > tol_v:
        raise SolveFailure(f"converged point misses tolerance: "
                           f"h={sol.horiz_residual}, v={sol.vert_residual}", rows)
    return sol


def continue_family(k_values, theta_bracket=None, **kw) -> list:
    """Solve a sorted list of twists, warm-starting each outer bracket.

    Per-twist failures are recorded in place of the Solution; continuation
    proceeds from the last success.
    """
    out = []
    last = None
    for k in k_values:
        bracket = theta_bracket
        if bracket is None and last is not None:
            w = 0.12
            bracket = (last.theta_angle - w, last.theta_angle + w)
        try:
            sol = solve_k(k, theta_bracket=bracket, **kw)
        except SolveFailure:
            if bracket is not None:
                # retry cold with the default window
                try:
                    sol = solve_k(k, theta_bracket=None, **kw)
                except SolveFailure as e2:
                    out.append(e2)
                    continue
            else:
                raise
        out.append(sol)
        last = sol
    return out


def sweep(k: float, theta_grid, b_grid, workers: int = 1):
    """Residual field over a (theta, b) grid.

    Returns rows (theta, b, horiz, vert, quad_err, flag) in theta-major
    order; rows where evaluation failed carry flag="error" and NaNs.  The
    row order is canonical regardless of `workers`.
    """
    cells = [(float(th), float(b)) for th in theta_grid for b in b_grid]

    def one(cell):
        th, b = cell
        try:
            d = data_for(th, k, b)
            rep = period_report(d)
            return (th, b, rep.horiz_residual, rep.vert_residual,
                    rep.quadrature_error_estimate, "ok")
        except Exception:
            return (th, b, float("nan"), float("nan"), float("nan"), "error")

    if workers <= 1:
        return [one(c) for c in cells]
    with _fut.ThreadPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(one, cells))
    return results
