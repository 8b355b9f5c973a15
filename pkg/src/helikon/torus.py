"""Rhombic torus model: marked points, symmetries, diagonal frame, cycles.

The torus is C/{1, tau} with tau = e^{i*theta_angle}.  Vertices 0, 1, tau,
1+tau all project to one point ("the vertex").  The diagonal 1 -> tau is the
*horizontal* diagonal and carries the four marked points; the diagonal
0 -> 1+tau is the *vertical* diagonal (it maps to the screw axis).

Coordinates: the (t, u) frame

    z = O + t*(1-tau)/2 + u*(1+tau)/2,      O = (1+tau)/2

puts the horizontal diagonal at u = 0 (t in [-1, 1]) and the vertical one at
t = 0.  Lattice translations act by (t, u) -> (t+1, u+1) and (t-1, u+1), so
translates of the horizontal diagonal live on the integer-u lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import DomainError


class PlacementError(ValueError):
    """Marked-point parameters outside the admissible range."""


class GeometryError(ValueError):
    """No admissible path for the requested clearance / radius."""


@dataclass(frozen=True)
class RhombicTorus:
    theta_angle: float
    tau: complex = field(init=False)
    center: complex = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.theta_angle < np.pi:
            raise DomainError(f"rhombus angle must lie in (0, pi), got {self.theta_angle}")
        object.__setattr__(self, "tau", complex(np.exp(1j * self.theta_angle)))
        object.__setattr__(self, "center", (1.0 + self.tau) / 2.0)

    @property
    def horiz_diag(self) -> tuple[complex, complex]:
        return (1.0 + 0j, self.tau)

    @property
    def vert_diag(self) -> tuple[complex, complex]:
        return (0j, 1.0 + self.tau)

    def from_tu(self, t, u):
        """Map diagonal-frame coordinates to the plane."""
        return self.center + t * (1.0 - self.tau) / 2.0 + u * (1.0 + self.tau) / 2.0

    def to_tu(self, z):
        w = np.asarray(z, dtype=complex) - self.center
        # solve w = t*(1-tau)/2 + u*(1+tau)/2 (real t, u)
        m = np.array([[np.real(1 - self.tau) / 2, np.real(1 + self.tau) / 2],
                      [np.imag(1 - self.tau) / 2, np.imag(1 + self.tau) / 2]])
        rhs = np.stack([np.real(w).ravel(), np.imag(w).ravel()])
        t, u = np.linalg.solve(m, rhs)
        return t.reshape(np.shape(z)), u.reshape(np.shape(z))


def make_torus(theta_angle: float) -> RhombicTorus:
    return RhombicTorus(float(theta_angle))


@dataclass(frozen=True)
class MarkedPoints:
    """Ends E1, E2 and vertical points V1, V2 on the horizontal diagonal.

    The placement law a = k*(1-b) (equivalently a + k*b = k) ties the two
    pairs together; it is exact by construction here.
    """

    k: float
    b: float
    a: float = field(init=False)
    E1: complex = field(init=False)
    E2: complex = field(init=False)
    V1: complex = field(init=False)
    V2: complex = field(init=False)
    torus: RhombicTorus = None

    def __post_init__(self):
        a = self.k * (1.0 - self.b)
        object.__setattr__(self, "a", a)
        w = (1.0 - self.torus.tau) / 2.0
        O = self.torus.center
        object.__setattr__(self, "E1", O - self.b * w)
        object.__setattr__(self, "E2", O + self.b * w)
        object.__setattr__(self, "V1", O - a * w)
        object.__setattr__(self, "V2", O + a * w)

    @property
    def degenerate(self) -> bool:
        return abs(self.a - self.b) < 1e-12 or self.b > 1 - 1e-12

    def all_points(self) -> list[complex]:
        return [self.E1, self.E2, self.V1, self.V2]

    def min_pairwise_distance(self) -> float:
        pts = self.all_points()
        d = min(abs(p - q) for i, p in enumerate(pts) for q in pts[i + 1:])
        # the vertex is effectively a fifth special point for b -> 1
        dv = min(abs(p - 1.0) for p in pts)
        return min(d, dv) if dv > 0 else d


def place_points(torus: RhombicTorus, k: float, b: float) -> MarkedPoints:
    if k <= 0.5:
        raise PlacementError(f"k must exceed 1/2, got {k}")
    if not 0.0 < b < 1.0:
        raise PlacementError(f"b must lie in (0, 1), got {b}")
    a = k * (1.0 - b)
    if not 0.0 < a < 1.0:
        raise PlacementError(f"a = k(1-b) = {a} falls outside (0, 1); shrink 1-b")
    return MarkedPoints(k=float(k), b=float(b), torus=torus)


def default_clearance(points: MarkedPoints) -> float:
    return 0.02 * points.min_pairwise_distance()


@dataclass
class DomainPath:
    """Piecewise-linear path in the universal cover, marked-point aware.

    homology_tag (m, n) records endpoint - startpoint = m + n*tau for closed
    paths (closed meaning closed on the torus).
    """

    vertices: list[complex]
    clearance: float
    closed: bool
    homology_tag: tuple[int, int]
    crosses_cut: bool = False

    def segments(self):
        return list(zip(self.vertices[:-1], self.vertices[1:]))

    def check(self, torus: RhombicTorus, points: MarkedPoints | None):
        if self.closed:
            m, n = self.homology_tag
            gap = self.vertices[-1] - self.vertices[0] - (m + n * torus.tau)
            if abs(gap) > 1e-12:
                raise GeometryError(f"homology tag {self.homology_tag} vs endpoint gap {gap}")
        if points is not None:
            d = path_point_distance(self.vertices, points, torus)
            if d < self.clearance * (1 - 1e-9):
                raise GeometryError(f"path comes within {d} of a marked point "
                                    f"(clearance {self.clearance})")


def _seg_point_distance(a: complex, b: complex, p) -> np.ndarray:
    ab = b - a
    denom = abs(ab) ** 2
    p = np.asarray(p, dtype=complex)
    t = np.clip(((p - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    return np.abs(a + t * ab - p)


def path_point_distance(vertices, points: MarkedPoints, torus: RhombicTorus) -> float:
    """Min distance from the polyline to any lattice translate of a marked point."""
    translates = []
    for p in points.all_points():
        for m in range(-2, 4):
            for n in range(-2, 4):
                translates.append(p + m + n * torus.tau)
    translates = np.array(translates)
    best = np.inf
    for a, b in zip(vertices[:-1], vertices[1:]):
        best = min(best, float(_seg_point_distance(a, b, translates).min()))
    return best


def generator_cycle(torus: RhombicTorus, points: MarkedPoints, which,
                    clearance: float | None = None) -> DomainPath:
    """Canonical generator cycle in class [1] or [tau].

    Both run as mid-strip staircases: along u = 1/2 (maximally far from the
    marked points, which sit on the integer-u lines), then up through the
    u = 1 diagonal at the center of its window between the end punctures.
    They avoid the branch cut (the horizontal-diagonal segment through the
    vertex from E2 to E1) for every admissible placement.
    """
    if clearance is None:
        clearance = default_clearance(points)
    if which in (1, "1"):
        tu = [(0.0, 0.5), (1.0, 0.5), (1.0, 1.5)]
        tag = (1, 0)
    elif which in ("tau", "t"):
        tu = [(0.0, 0.5), (-1.0, 0.5), (-1.0, 1.5)]
        tag = (0, 1)
    else:
        raise ValueError(f"which must be 1 or 'tau', got {which!r}")
    verts = [torus.from_tu(t, u) for t, u in tu]
    path = DomainPath(vertices=verts, clearance=clearance, closed=True, homology_tag=tag)
    path.check(torus, points)
    return path


def monodromy_cycle(torus: RhombicTorus, points: MarkedPoints,
                    clearance: float | None = None) -> DomainPath:
    """Frozen loop used for the Gauss-map monodromy check.

    It generates the tau-cycle subgroup, crossing the branch cut exactly once
    (midway between E2's translate and the vertex).  Traversal direction is
    the frozen one: endpoint - startpoint = -tau, which is the orientation
    that produces the multiplier exp(-2*pi*i*k) on the continued log g.
    """
    if clearance is None:
        clearance = default_clearance(points)
    delta = 0.08
    tstar = (points.b - 1.0) / 2.0
    tu = [(-1.0, 1.0 + delta), (tstar, 1.0 + delta), (tstar, delta), (0.0, delta)]
    verts = [torus.from_tu(t, u) for t, u in tu]
    path = DomainPath(vertices=verts, clearance=min(clearance, 0.2 * abs(tstar)),
                      closed=True, homology_tag=(0, -1), crosses_cut=True)
    path.check(torus, points)
    return path


def axis_half_path(torus: RhombicTorus, inset: float = 1e-9) -> DomainPath:
    """Half of the vertical diagonal, oriented vertex -> center.

    The orientation is the frozen one for the normal-turning integral; the
    two halves of the diagonal give equal values, so only the direction
    (toward the center) matters.
    """
    verts = [torus.from_tu(0.0, 1.0 - inset), torus.from_tu(0.0, inset)]
    return DomainPath(vertices=verts, clearance=0.0, closed=False, homology_tag=(0, 0))


def symmetry_images(torus: RhombicTorus, z) -> dict:
    """Images of z under the three symmetries of the marked rhombus.

    rho: 180-degree rotation about the center; mu_v / mu_h: reflections
    across the vertical / horizontal diagonal lines.  rho = mu_v o mu_h.
    """
    z = np.asarray(z, dtype=complex)
    tau = torus.tau
    rho = 2.0 * torus.center - z
    mu_v = tau * np.conj(z)
    mu_h = 1.0 + tau - tau * np.conj(z)
    if z.shape:
        return {"rho": rho, "mu_v": mu_v, "mu_h": mu_h}
    return {"rho": complex(rho), "mu_v": complex(mu_v), "mu_h": complex(mu_h)}


def cut_segments(torus: RhombicTorus, points: MarkedPoints):
    """The branch cut: horizontal-diagonal pieces from E2 and E1 to the vertex."""
    return [(points.E2, 1.0 + 0j), (torus.tau, points.E1)]


def segments_intersect(a1: complex, a2: complex, b1: complex, b2: complex) -> bool:
    """Proper/improper intersection test for two closed segments."""
    d1 = a2 - a1
    d2 = b2 - b1
    den = (d1 * np.conj(d2)).imag
    num_t = ((b1 - a1) * np.conj(d2)).imag
    num_s = ((b1 - a1) * np.conj(d1)).imag
    if abs(den) < 1e-15:
        return False
    t = num_t / den
    s = num_s / den
    return -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= s <= 1 + 1e-12


def path_crosses_cut(path: DomainPath, torus: RhombicTorus, points: MarkedPoints) -> bool:
    cuts = []
    for c1, c2 in cut_segments(torus, points):
        for m in range(-2, 4):
            for n in range(-2, 4):
                off = m + n * torus.tau
                cuts.append((c1 + off, c2 + off))
    for a1, a2 in path.segments():
        for c1, c2 in cuts:
            if segments_intersect(a1, a2, c1, c2):
                return True
    return False
