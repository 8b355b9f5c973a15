"""Contour quadrature of the Weierstrass forms and the period residuals.

All path integrals go through one composite Gauss-Legendre engine with
panel-doubling refinement; branch-continued forms (g dh and dh/g for
non-integer twist) get their log-g values from the per-translate phase
unwrap of `weierstrass`, evaluated at the quadrature nodes themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .torus import DomainPath, GeometryError, generator_cycle, axis_half_path, monodromy_cycle
from .weierstrass import AccuracyError, WeierstrassData

_GX, _GW = leggauss(16)
_MAX_DOUBLINGS = 9


class DegeneratePeriodError(ArithmeticError):
    """Period ratio undefined (vanishing denominator)."""


def _segment_nodes(a: complex, b: complex, panels: int):
    """Gauss nodes and complex dz-weights for `panels` equal panels on a->b."""
    j = np.arange(panels, dtype=float)
    mid = (j + 0.5) / panels
    half = 0.5 / panels
    t = (mid[:, None] + half * _GX[None, :]).ravel()
    w = np.broadcast_to(_GW[None, :] * half, (panels, _GX.size)).ravel() * (b - a)
    return a + (b - a) * t, w


def _branch_values(data: WeierstrassData, a, b, z_nodes, term_anchors):
    """Continuous log g at ordered quadrature nodes of segment a->b."""
    zs = np.concatenate([[a], z_nodes, [b]])
    lg, ends, step = data.log_g_unwrapped(zs, term_anchors=term_anchors)
    if step > 0.9 * np.pi:
        raise AccuracyError("phase step too large at this panel density")
    return lg[1:-1], ends


def integrate_form(form, path: DomainPath, data: WeierstrassData | None = None,
                   branch: str | None = None,
                   abs_tol: float = 1e-10, rel_tol: float = 1e-12,
                   panels0: int = 16):
    """Adaptive integral of `form` along the path.

    form(z) must map complex nodes to the form's density per dz.  With
    branch="g" the continued log g is computed alongside and handed to the
    density as form(z, log_g).  Panels double until successive estimates
    agree to tolerance; returns (value, error_estimate).

    Raises AccuracyError when doubling stops improving before tolerance.
    """
    def sweep(panels: int) -> complex:
        total = 0.0 + 0.0j
        anchors = None
        if branch == "g":
            anchors = data.branch_at(path.vertices[0]).term_logs
        for a, b in path.segments():
            z, w = _segment_nodes(a, b, panels)
            if branch == "g":
                lg, anchors = _branch_values(data, a, b, z, anchors)
                total += np.sum(w * form(z, lg))
            else:
                total += np.sum(w * form(z))
        return total

    panels = panels0
    prev = None
    last_gap = np.inf
    for _ in range(_MAX_DOUBLINGS + 1):
        try:
            cur = sweep(panels)
        except AccuracyError:
            panels *= 2
            prev = None
            continue
        if prev is not None:
            last_gap = abs(cur - prev)
            if last_gap < abs_tol or last_gap < rel_tol * abs(cur):
                return cur, last_gap
        prev = cur
        panels *= 2
    raise AccuracyError(f"quadrature stalled at {panels} panels, "
                        f"last interval {last_gap:.3e}")


def integrate_dh(data: WeierstrassData, path: DomainPath, **kw):
    return integrate_form(data.dh_dz, path, **kw)


def integrate_gdh(data: WeierstrassData, path: DomainPath, inverse: bool = False, **kw):
    sign = -1.0 if inverse else 1.0

    def density(z, lg):
        return np.exp(sign * lg) * data.dh_dz(z)

    return integrate_form(density, path, data=data, branch="g", **kw)


def integrate_dlog_g(data: WeierstrassData, path: DomainPath, **kw):
    return integrate_form(data.dlog_g, path, **kw)


def integrate_circle(form, center: complex, radius: float, n: int = 64):
    """Spectral integral over the circle |z - center| = radius (counterclockwise).

    Gauss nodes in the angle; a doubled-order evaluation provides the
    Richardson-style error estimate (the integrand is analytic, so
    convergence is exponential in n).
    """
    def once(m):
        phi = np.pi * (_gauss_angle(m) + 1.0)
        w = _gauss_angle_w(m) * np.pi
        z = center + radius * np.exp(1j * phi)
        return np.sum(form(z) * 1j * radius * np.exp(1j * phi) * w)

    v1, v2 = once(n), once(2 * n)
    return v2, abs(v2 - v1)


_angle_cache: dict = {}


def _gauss_angle(m):
    if m not in _angle_cache:
        _angle_cache[m] = leggauss(m)
    return _angle_cache[m][0]


def _gauss_angle_w(m):
    if m not in _angle_cache:
        _angle_cache[m] = leggauss(m)
    return _angle_cache[m][1]


# ---- period report -------------------------------------------------------


@dataclass
class PeriodReport:
    period_gdh_1: complex
    period_gdh_tau: complex
    period_invg_1: complex
    period_invg_tau: complex
    period_dh_1: complex
    period_dh_tau: complex
    residue_E1: complex
    residue_E2: complex
    horiz_residual: float
    vert_residual: float
    quadrature_error_estimate: float

    def as_dict(self) -> dict:
        return {
            "period_gdh_1": _cpair(self.period_gdh_1),
            "period_gdh_tau": _cpair(self.period_gdh_tau),
            "period_invg_1": _cpair(self.period_invg_1),
            "period_invg_tau": _cpair(self.period_invg_tau),
            "period_dh_1": _cpair(self.period_dh_1),
            "period_dh_tau": _cpair(self.period_dh_tau),
            "residue_E1": _cpair(self.residue_E1),
            "residue_E2": _cpair(self.residue_E2),
            "horiz_residual": self.horiz_residual,
            "vert_residual": self.vert_residual,
            "quadrature_error_estimate": self.quadrature_error_estimate,
        }


def _cpair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def frozen_cycles(data: WeierstrassData) -> tuple[DomainPath, DomainPath]:
    """The frozen generator representatives used for every residual."""
    b1 = generator_cycle(data.torus, data.points, 1)
    b2 = generator_cycle(data.torus, data.points, "tau")
    return b1, b2


def horizontal_residual(data: WeierstrassData, **kw) -> float:
    """Im of the gdh generator-period ratio; 0 iff the horizontal condition
    is solvable by rotating gdh by a constant."""
    b1, b2 = frozen_cycles(data)
    p1, _ = integrate_gdh(data, b1, **kw)
    p2, _ = integrate_gdh(data, b2, **kw)
    if abs(p2) < 1e-12:
        raise DegeneratePeriodError("vanishing gdh period on the tau generator")
    return float(np.imag(p1 / p2))


def vertical_residual(data: WeierstrassData, **kw) -> float:
    """Re of the dh period over the frozen class-[1] cycle."""
    b1, _ = frozen_cycles(data)
    v, _ = integrate_dh(data, b1, **kw)
    return float(np.real(v))


def cross_check_hpc(data: WeierstrassData, **kw) -> float:
    """|int_B g dh - conj(int_B dh/g)| over the frozen class-[1] cycle.

    Rotating g by a unit constant multiplies both terms identically, so the
    value is rotation-invariant; it vanishes (to quadrature accuracy) at
    solutions, whatever normalization frame g carries.
    """
    b1, _ = frozen_cycles(data)
    p, _ = integrate_gdh(data, b1, **kw)
    q, _ = integrate_gdh(data, b1, inverse=True, **kw)
    return float(abs(p - np.conj(q)))


def end_residue(data: WeierstrassData, which_end: int, radius: float | None = None, n: int = 64):
    """Counterclockwise dh integral over a small circle around E1 or E2."""
    p = data.points
    center = p.E1 if which_end == 1 else p.E2
    others = [q for q in p.all_points() + [1.0 + 0j, data.torus.tau] if abs(q - center) > 1e-14]
    max_r = 0.5 * min(abs(q - center) for q in others)
    if radius is None:
        radius = 0.5 * max_r
    if radius >= max_r * (1 + 1e-12):
        raise GeometryError(f"end-cycle radius {radius} would enclose other marked points "
                            f"(limit {max_r})")
    val, err = integrate_circle(data.dh_dz, center, radius, n=n)
    return val, err


def period_report(data: WeierstrassData, **kw) -> PeriodReport:
    b1, b2 = frozen_cycles(data)
    p1, e1 = integrate_gdh(data, b1, **kw)
    p2, e2 = integrate_gdh(data, b2, **kw)
    q1, e3 = integrate_gdh(data, b1, inverse=True, **kw)
    q2, e4 = integrate_gdh(data, b2, inverse=True, **kw)
    d1, e5 = integrate_dh(data, b1, **kw)
    d2, e6 = integrate_dh(data, b2, **kw)
    r1, e7 = end_residue(data, 1)
    r2, e8 = end_residue(data, 2)
    if abs(p2) < 1e-12:
        raise DegeneratePeriodError("vanishing gdh period on the tau generator")
    return PeriodReport(
        period_gdh_1=p1, period_gdh_tau=p2,
        period_invg_1=q1, period_invg_tau=q2,
        period_dh_1=d1, period_dh_tau=d2,
        residue_E1=r1, residue_E2=r2,
        horiz_residual=float(np.imag(p1 / p2)),
        vert_residual=float(np.real(d1)),
        quadrature_error_estimate=float(sum((e1, e2, e3, e4, e5, e6, e7, e8))),
    )


def abel_bilinear_check(data: WeierstrassData, base_offset: float | None = None,
                        **kw) -> float:
    """|(alpha_1*tau - alpha_2) / (2*pi*i*(1-tau)) - (a + k*b)|.

    alpha_i are the dlog g periods over parallelogram edges based near the
    vertex (so every marked point keeps its standard in-cell representative),
    traversed in the frozen orientation, the one that makes the quotient come
    out +(a+kb); the reverse gives its negative.  The base offset defaults to
    a quarter of the gap between the edges and the nearest marked point,
    which shrinks as the ends approach the vertex.
    """
    tau = data.torus.tau
    if base_offset is None:
        base_offset = min(0.04, (1.0 - data.points.b) / 4.0, data.points.a / 4.0)
    z0 = base_offset * (1.0 + tau)
    edge1 = DomainPath([z0 + 1.0, z0], clearance=0.0, closed=True, homology_tag=(-1, 0))
    edge2 = DomainPath([z0 + tau, z0], clearance=0.0, closed=True, homology_tag=(0, -1))
    a1, _ = integrate_dlog_g(data, edge1, **kw)
    a2, _ = integrate_dlog_g(data, edge2, **kw)
    val = (a1 * tau - a2) / (2j * np.pi * (1.0 - tau))
    target = data.points.a + data.k * data.points.b
    return float(abs(val - target))


def axis_turning(data: WeierstrassData, **kw) -> float:
    """Im of the dlog g integral along the vertical-diagonal half path.

    Frozen orientation: vertex toward center.  At solved parameters the
    value is -pi*(k-1); the real part is ~0 because |g| = 1 on the axis.
    """
    path = axis_half_path(data.torus)
    v, _ = integrate_dlog_g(data, path, **kw)
    return float(np.imag(v))


def gauss_map_monodromy(data: WeierstrassData) -> float:
    """Continued change of arg g around the frozen tau-monodromy loop.

    Expected: -2*pi*k modulo 2*pi.
    """
    from .weierstrass import continue_g

    loop = monodromy_cycle(data.torus, data.points)
    states = continue_g(data, loop)
    return float(np.imag(states[-1].log_g - states[0].log_g))
