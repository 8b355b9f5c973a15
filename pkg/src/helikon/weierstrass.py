"""Weierstrass data {g, dh} on a marked rhombic torus, built from theta quotients.

With theta the odd theta of `elliptic` and E1, E2, V1, V2 the marked points,

    dh = phase * theta(z-V1) theta(z-V2) / (theta(z-E1) theta(z-E2)) dz
    g  = scale * theta(z-V2) theta(z-(E2+tau))^k / (theta(z-V1) theta(z-E1)^k)

The unit factor `phase` makes dh real and positive on the vertical diagonal
(in the direction from the vertex toward the center); the factor `scale`
makes g unitary on the vertical diagonal with g = 1 exactly at the center.
The tau-shift on the E2 translate is what gives g the screw-compatible
multiplier along the tau direction.

For non-integer k the function g is multivalued; every consumer goes through
`continue_log_g`, which continues log g along a polyline by per-translate
phase unwrapping (exact to roundoff, no quadrature in the branch).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import Lattice, PoleError, log_theta_derivative, theta
from .torus import DomainPath, MarkedPoints, RhombicTorus, make_torus, place_points

_MAX_REFINE = 12


class AccuracyError(ArithmeticError):
    """Requested tolerance could not be certified."""


@dataclass(frozen=True)
class BranchState:
    """A point together with a continuous determination of log g there.

    `term_logs` carries the per-translate log values backing `log_g`; they
    are what continuation actually chains (each translate's branch jumps are
    exact multiples of 2*pi*i, the weighted total's are not).
    """

    point: complex
    log_g: complex
    term_logs: tuple = None


@dataclass(frozen=True)
class WeierstrassData:
    torus: RhombicTorus
    points: MarkedPoints
    phase_t: float          # dh phase: dh = e^{i phase_t} * (theta quotient) dz
    rho_scale: float        # |scale| applied to g (real, positive)
    g_phase: complex        # unit factor completing g(O) = 1
    degenerate: bool

    @property
    def k(self) -> float:
        return self.points.k

    @property
    def lattice(self) -> Lattice:
        return Lattice(self.torus.tau, rhombic=True)

    # ---- raw evaluators ------------------------------------------------

    def dh_dz(self, z):
        """dh/dz, vectorized; single-valued for every k."""
        p, lat = self.points, self.lattice
        z = np.asarray(z, dtype=complex)
        num = theta(z - p.V1, lat) * theta(z - p.V2, lat)
        den = theta(z - p.E1, lat) * theta(z - p.E2, lat)
        return np.exp(1j * self.phase_t) * num / den

    def dlog_g(self, z):
        """d(log g)/dz = g'/g; single-valued meromorphic for every k."""
        p, lat = self.points, self.lattice
        z = np.asarray(z, dtype=complex)
        return (log_theta_derivative(z - p.V2, lat)
                - log_theta_derivative(z - p.V1, lat)
                + p.k * (log_theta_derivative(z - (p.E2 + self.torus.tau), lat)
                         - log_theta_derivative(z - p.E1, lat)))

    def _log_g_translates(self):
        p = self.points
        return [(1.0, p.V2), (-1.0, p.V1),
                (p.k, p.E2 + self.torus.tau), (-p.k, p.E1)]

    def log_g_principal(self, z):
        """Per-translate principal-log value of log g (no path continuity)."""
        lat = self.lattice
        z = np.asarray(z, dtype=complex)
        acc = np.log(self.g_phase * self.rho_scale) * np.ones(z.shape or (1,), dtype=complex)
        for w, s in self._log_g_translates():
            acc = acc + w * np.log(theta(z - s, lat))
        return acc.reshape(z.shape) if z.shape else complex(acc[0])

    def log_g_unwrapped(self, zs: np.ndarray, term_anchors=None):
        """Continuous log g along an ordered point sequence.

        Each translate's log theta is unwrapped separately: its branch jumps
        are exact multiples of 2*pi*i, so snapping a term to its anchor sheet
        is exact even when the total carries fractional weights.  Successive
        phase steps must stay below ~0.9*pi per translate; callers refine
        their sampling until `max_step` says so.

        Returns (log g at each point, per-term end values, max phase step).
        """
        lat = self.lattice
        tot = np.full(len(zs), np.log(self.g_phase * self.rho_scale), dtype=complex)
        ends = []
        max_step = 0.0
        translates = self._log_g_translates()
        if term_anchors is None:
            term_anchors = (None,) * len(translates)
        for (w, s), anchor in zip(translates, term_anchors):
            tv = theta(zs - s, lat)
            if np.any(tv == 0.0):
                raise PoleError("continuation path hits a zero/pole of g")
            lg = np.log(tv)
            im = np.unwrap(np.imag(lg))
            if anchor is not None:
                im = im + 2.0 * np.pi * np.round((np.imag(anchor) - im[0]) / (2.0 * np.pi))
            if len(im) > 1:
                max_step = max(max_step, float(np.max(np.abs(np.diff(im)))))
            term = np.real(lg) + 1j * im
            tot = tot + w * term
            ends.append(complex(term[-1]))
        return tot, tuple(ends), max_step

    def branch_at(self, z) -> "BranchState":
        """Principal-branch state at z (the continuation start)."""
        lat = self.lattice
        terms = []
        for w, s in self._log_g_translates():
            tv = complex(np.atleast_1d(theta(np.atleast_1d(z - s), lat))[0])
            if tv == 0.0:
                raise PoleError("branch anchor sits on a zero/pole of g")
            terms.append(np.log(tv))
        total = np.log(self.g_phase * self.rho_scale) + sum(
            w * t for (w, _), t in zip(self._log_g_translates(), terms))
        return BranchState(point=complex(z), log_g=complex(total), term_logs=tuple(terms))

    # ---- normalized pointwise forms -------------------------------------

    def g_at(self, z, branch: BranchState | None = None):
        """g(z); for non-integer k a BranchState at z must supply the sheet."""
        if branch is not None:
            return np.exp(branch.log_g)
        return np.exp(self.log_g_principal(z))


def _phase_for_dh(torus: RhombicTorus, points: MarkedPoints) -> float:
    """Phase making dh real, positive on the vertex -> center direction."""
    lat = Lattice(torus.tau, rhombic=True)
    O = torus.center
    num = theta(O - points.V1, lat) * theta(O - points.V2, lat)
    den = theta(O - points.E1, lat) * theta(O - points.E2, lat)
    direction = -(1.0 + torus.tau)  # from vertex 1+tau toward the center
    val = (num / den) * direction
    return float(-np.angle(val))


def build_data(torus: RhombicTorus, points: MarkedPoints) -> WeierstrassData:
    """Fix dh's phase and g's scale, returning ready evaluators.

    Degenerate placements (a = b, or b at the edge of its range) are built
    and flagged rather than rejected; the forms stay meaningful there.
    """
    phase_t = _phase_for_dh(torus, points)
    lat = Lattice(torus.tau, rhombic=True)
    O = torus.center
    g_raw = np.exp(sum(w * np.log(theta(np.atleast_1d(O - s), lat))
                       for w, s in [(1.0, points.V2), (-1.0, points.V1),
                                    (points.k, points.E2 + torus.tau),
                                    (-points.k, points.E1)]))[0]
    rho = 1.0 / abs(g_raw)
    g_phase = np.conj(g_raw) / abs(g_raw)
    return WeierstrassData(torus=torus, points=points, phase_t=phase_t,
                           rho_scale=float(rho), g_phase=complex(g_phase),
                           degenerate=points.degenerate)


def data_for(theta_angle: float, k: float, b: float) -> WeierstrassData:
    torus = make_torus(theta_angle)
    return build_data(torus, place_points(torus, k, b))


def continue_g(data: WeierstrassData, path: DomainPath,
               samples_per_segment: int = 64) -> list[BranchState]:
    """Continue log g along the path; returns a BranchState per path vertex.

    The sampling density doubles until every per-translate phase step stays
    under pi/4, so the unwrap is unambiguous with margin.
    """
    states = [data.branch_at(path.vertices[0])]
    for a, b in path.segments():
        n = samples_per_segment
        for attempt in range(_MAX_REFINE):
            zs = a + (b - a) * np.linspace(0.0, 1.0, n)
            lg, ends, step = data.log_g_unwrapped(zs, term_anchors=states[-1].term_logs)
            if step < np.pi / 4:
                break
            n *= 2
        else:
            raise AccuracyError("phase steps along path did not settle; "
                                "path too close to a zero/pole of g")
        states.append(BranchState(b, complex(lg[-1]), ends))
    return states


def eval_forms(data: WeierstrassData, z, branch: BranchState | None = None,
               clearance: float | None = None) -> dict:
    """g, dh, g*dh and dh/g at z (per dz), using the branch determination."""
    if clearance is not None:
        d = min(abs(np.asarray(z) - p).min() if np.shape(z) else abs(z - p)
                for p in data.points.all_points())
        if d < clearance / 10.0:
            raise AccuracyError(f"evaluation {d} from a marked point; "
                                f"accuracy not certified below clearance/10")
    g = data.g_at(z, branch)
    dh = data.dh_dz(z)
    return {"g": g, "dh": dh, "gdh": g * dh, "one_over_g_dh": dh / g}


def metric_ds(data: WeierstrassData, z, branch: BranchState | None = None):
    """Conformal metric factor |g dh| + |dh/g| per unit |dz|."""
    f = eval_forms(data, z, branch)
    return np.abs(f["gdh"]) + np.abs(f["one_over_g_dh"])


# ---- helicoid reference -------------------------------------------------


@dataclass(frozen=True)
class HelicoidData:
    """Closed-form Weierstrass data of the helicoid quotient: g = i z^k, dh = k i dz/z.

    Defined on C - {0}; for non-integer k, g lives on the log z cover.  The
    immersion from base point z0 = 1 integrates to

        2(x1 + i x2) = z^{-k} - conj(z)^k + (constant fixed by X(1) = 0)
        x3 = -k * arg z      (continuously along the path)

    which is the ruled helicoid: |z| = 1 maps to the axis, rays to rulings.
    """

    k: float

    def g(self, w):
        """Gauss map on the log-cover coordinate w = log z."""
        return 1j * np.exp(self.k * np.asarray(w, dtype=complex))

    def dh_dz(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise PoleError("helicoid dh has a pole at z = 0")
        return 1j * self.k / z

    def immerse_w(self, w):
        """Closed-form immersion on the cover; w = log z, X(w=0) = 0."""
        w = np.asarray(w, dtype=complex)
        z_mk = np.exp(-self.k * w)          # z^{-k}, continuous on the cover
        zbar_k = np.exp(self.k * np.conj(w))  # conj(z)^k, continuous
        h = 0.5 * (z_mk - zbar_k)
        x3 = -self.k * np.imag(w)
        return np.stack([np.real(h), np.imag(h), x3], axis=-1)


def helicoid_data(k: float) -> HelicoidData:
    if k <= 0:
        raise ValueError(f"helicoid twist parameter must be positive, got {k}")
    return HelicoidData(k=float(k))
