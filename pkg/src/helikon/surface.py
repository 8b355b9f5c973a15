"""Immersion of the solved Weierstrass data into R^3 and mesh machinery.

The fundamental rhombus is sampled on an n-by-n torus grid; coordinates are
obtained by integrating (1/2(g - 1/g), i/2(g + 1/g), 1) dh edge-by-edge along
a spanning tree rooted near the center (so discrete closedness is exact on
tree edges and the period residuals show up only as seam mismatch).  Cells
within the end cutoff disks or crossing the branch cut are left open; the
surface scale is fixed so the screw translation per end loop is exactly
2*pi*k.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .periods import end_residue
from .torus import GeometryError, cut_segments, segments_intersect
from .weierstrass import HelicoidData, WeierstrassData

_EGX, _EGW = leggauss(12)


class UnsolvedDataError(ValueError):
    """Mesh requested for data whose period residuals are not small."""


class ScrewMismatchError(ValueError):
    """Residue-derived translation inconsistent with the requested screw."""


@dataclass
class Mesh:
    vertices: np.ndarray                # (N, 3) float
    faces: np.ndarray                   # (M, 3) int
    domain_uv: np.ndarray               # (N,) complex source points (NaN for copies)
    boundary_tags: dict = field(default_factory=dict)
    screw_angle: float = 0.0            # per fundamental copy
    screw_translation: float = 0.0

    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def validate(self):
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("mesh has non-finite vertices")
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face indices out of range")


def _phi_rows(data: WeierstrassData, z: np.ndarray, log_g: np.ndarray) -> np.ndarray:
    g = np.exp(log_g)
    dh = data.dh_dz(z)
    return np.stack([0.5 * (g - 1.0 / g) * dh,
                     0.5j * (g + 1.0 / g) * dh,
                     dh])


def _grid_z(data: WeierstrassData, ix, iy, n):
    return (ix / n) + (iy / n) * data.torus.tau


def _puncture_distance(data: WeierstrassData, z) -> np.ndarray:
    """Distance to the nearest translate of an end puncture."""
    z = np.asarray(z, dtype=complex)
    best = np.full(z.shape, np.inf)
    tau = data.torus.tau
    for p in (data.points.E1, data.points.E2):
        for m in (-1, 0, 1, 2):
            for nn in (-1, 0, 1, 2):
                best = np.minimum(best, np.abs(z - (p + m + nn * tau)))
    return best


def _cut_translates(data: WeierstrassData):
    tau = data.torus.tau
    c1s, c2s = [], []
    for c1, c2 in cut_segments(data.torus, data.points):
        for m in (-1, 0, 1, 2):
            for nn in (-1, 0, 1, 2):
                off = m + nn * tau
                c1s.append(c1 + off)
                c2s.append(c2 + off)
    return np.array(c1s), np.array(c2s)


def _edge_crosses_cut(a: complex, b: complex, cuts) -> bool:
    """True when the open interior of edge a->b meets a cut translate.

    Edges are allowed to *end* on the cut; the branch side such a vertex
    inherits is the side its tree edge came from.
    """
    c1, c2 = cuts
    d1 = b - a
    d2 = c2 - c1
    den = (d1 * np.conj(d2)).imag
    ok = np.abs(den) > 1e-15
    t = np.where(ok, ((c1 - a) * np.conj(d2)).imag / np.where(ok, den, 1.0), np.inf)
    s = np.where(ok, ((c1 - a) * np.conj(d1)).imag / np.where(ok, den, 1.0), np.inf)
    hit = (t > 1e-9) & (t < 1 - 1e-9) & (s > -1e-12) & (s < 1 + 1e-12)
    return bool(np.any(hit))


def _on_cut(z, cuts) -> np.ndarray:
    """Points lying on a cut translate (within roundoff)."""
    c1, c2 = cuts
    z = np.asarray(z, dtype=complex).ravel()
    d = c2 - c1
    t = ((z[:, None] - c1[None, :]) * np.conj(d)[None, :]).real / np.abs(d)[None, :] ** 2
    t = np.clip(t, 0.0, 1.0)
    dist = np.abs(c1[None, :] + t * d[None, :] - z[:, None]).min(axis=1)
    return dist < 1e-9


def _integrate_edge(data: WeierstrassData, a: complex, b: complex, term_anchors):
    """Phi integral over one short edge; returns (vector, end anchors)."""
    for depth in range(6):
        npan = 1 << depth
        t = ((np.arange(npan)[:, None] + 0.5) / npan
             + (0.5 / npan) * _EGX[None, :]).ravel()
        w = np.broadcast_to(_EGW[None, :] * (0.5 / npan), (npan, _EGX.size)).ravel() * (b - a)
        order = np.argsort(t)
        t, w = t[order], w[order]
        zs = np.concatenate([[a], a + (b - a) * t, [b]])
        lg, ends, step = data.log_g_unwrapped(zs, term_anchors=term_anchors)
        if step < np.pi / 4:
            rows = _phi_rows(data, zs[1:-1], lg[1:-1])
            return (rows * w).sum(axis=1), ends
    raise GeometryError(f"edge {a} -> {b} passes too close to a zero/pole of g")


def immerse(data: WeierstrassData, resolution: int = 64, end_cutoff: float = 0.05,
            force: bool = False, residual_tol: float = 1e-5,
            tree_order: int = 0) -> Mesh:
    """Triangulated fundamental domain of the immersed surface.

    Unsolved data is rejected unless `force` is given (exploratory meshes
    are fine, they just will not close up).  The base point is the grid
    vertex nearest the rhombus center, which maps to the origin.
    `tree_order` permutes the spanning-tree growth; at solutions the result
    is independent of it to quadrature accuracy.
    """
    from .periods import horizontal_residual, vertical_residual

    if not force:
        h = horizontal_residual(data)
        v = vertical_residual(data)
        if abs(h) > residual_tol or abs(v) > residual_tol:
            raise UnsolvedDataError(
                f"period residuals h={h:.2e}, v={v:.2e} exceed {residual_tol}; "
                f"pass force=True for an exploratory mesh")

    n = int(resolution)
    if n < 8:
        raise ValueError("resolution must be at least 8")
    tau = data.torus.tau
    cuts = _cut_translates(data)

    ij = np.arange(n)
    IX, IY = np.meshgrid(ij, ij, indexing="ij")
    zgrid = _grid_z(data, IX, IY, n)
    keep = _puncture_distance(data, zgrid) > end_cutoff
    on_cut = _on_cut(zgrid, cuts).reshape(n, n)

    # scale: screw translation per end loop is exactly 2*pi*k
    res1, _ = end_residue(data, 1)
    c_raw = abs(np.real(res1))
    if c_raw < 1e-12:
        raise ScrewMismatchError("end loop of dh has no vertical translation component")
    scale = 2.0 * np.pi * data.k / c_raw

    # Vertices on the cut represent seam points: the two banks map to
    # screw-related images, so each gets its own node keyed by bank sign.
    def node(i, j, bank):
        return (i, j, bank if on_cut[i, j] else 0)

    def edge_bank(zmid, za):
        # sign of the (t, u)-frame u-offset of the edge interior relative to
        # the nearest integer-u line (the cut carrier)
        _, u = data.torus.to_tu(np.array([zmid]))
        lvl = np.round(u[0])
        return 1 if u[0] > lvl else -1

    t0, u0 = data.torus.to_tu(zgrid)
    root_ij = np.unravel_index(np.argmin(np.where(keep & ~on_cut,
                                                  t0 ** 2 + u0 ** 2, np.inf)), zgrid.shape)
    root = node(*root_ij, 0)

    X = {root: np.zeros(3)}
    anchors = {root: data.branch_at(zgrid[root_ij]).term_logs}
    queue = deque([(root, root_ij)])
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if tree_order:
        steps = steps[::-1]
    while queue:
        key, (i, j) = queue.popleft()
        za = _grid_z(data, i, j, n)
        for di, dj in steps:
            i2, j2 = (i + di) % n, (j + dj) % n
            if not keep[i2, j2]:
                continue
            zb = za + (di + dj * tau) / n
            if _edge_crosses_cut(za, zb, cuts):
                continue
            bank = 0
            if on_cut[i2, j2] or on_cut[i, j]:
                bank = edge_bank(0.5 * (za + zb), za)
            if on_cut[i, j] and key[2] != bank:
                continue          # a seam node only expands into its own bank
            key2 = node(i2, j2, bank)
            if key2 in X:
                continue
            if np.min(_puncture_distance(data, np.array([0.5 * (za + zb)]))) < 0.8 * end_cutoff:
                continue
            vec, ends = _integrate_edge(data, za, zb, anchors[key])
            X[key2] = X[key] + np.real(vec)
            anchors[key2] = ends
            queue.append((key2, (i2, j2)))

    # faces: cells whose corners survive and whose closure avoids the cut
    index = {}
    vert_list, uv_list, bank_list = [], [], []
    for key, pos in X.items():
        i, j, bank = key
        index[key] = len(vert_list)
        vert_list.append(scale * pos)
        uv_list.append(zgrid[i, j])
        bank_list.append(bank)
    faces = []
    for i in range(n):
        for j in range(n):
            c = [(i, j), ((i + 1) % n, j), ((i + 1) % n, (j + 1) % n), (i, (j + 1) % n)]
            za = _grid_z(data, i, j, n)
            quad = [za, za + 1.0 / n, za + (1.0 + tau) / n, za + tau / n]
            # the cell diagonal can cross the cut corner-to-corner
            if any(_edge_crosses_cut(p, q, cuts)
                   for p, q in zip(quad, quad[1:] + quad[:1])) or \
                    _edge_crosses_cut(quad[0], quad[2], cuts):
                continue
            _, u_mid = data.torus.to_tu(np.array([za + (1.0 + tau) * 0.5 / n]))
            # cell bank relative to the nearest integer-u line (the cut carrier)
            cell_bank = 1 if (u_mid[0] - np.round(u_mid[0])) > 0 else -1
            keys = [node(*p, cell_bank) for p in c]
            if not all(k in index for k in keys):
                continue
            ids = [index[k] for k in keys]
            faces.append([ids[0], ids[1], ids[2]])
            faces.append([ids[0], ids[2], ids[3]])

    mesh = Mesh(vertices=np.array(vert_list),
                faces=np.array(faces, dtype=int).reshape(-1, 3),
                domain_uv=np.array(uv_list),
                boundary_tags={"end_cutoff": end_cutoff, "resolution": n,
                               "banks": bank_list},
                screw_angle=2.0 * np.pi * data.k,
                screw_translation=2.0 * np.pi * data.k)
    mesh.validate()
    return mesh


def mesh_report(data: WeierstrassData, mesh: Mesh, mesh_alt: Mesh | None = None,
                check_intersections: bool = True,
                asymptotic_radii: tuple = (0.1, 0.05)) -> dict:
    """Geometric verification report for a fundamental-domain mesh.

    Measures the axis collinearity (vertical-diagonal image), the planarity
    of the two horizontal-line images and the angle between their
    projections against pi*k (mod pi), spanning-tree path independence
    (when `mesh_alt` from another tree is supplied), the self-intersection
    count, and the end-asymptotics deviations at two ring radii.
    """
    diam = mesh.diameter()
    t, u = data.torus.to_tu(mesh.domain_uv)
    banks = np.array(mesh.boundary_tags.get("banks", np.zeros(len(t), dtype=int)))
    report: dict = {"diameter": diam, "symmetry": {}}

    axis = np.abs(t) < 1e-9
    if axis.any():
        v = mesh.vertices[axis]
        report["symmetry"]["axis_max_xy"] = float(np.abs(v[:, :2]).max() / diam)
    on_diag = np.abs(np.mod(u + 0.5, 1.0) - 0.5) < 1e-9
    # fold t to [0, 1] about the marked-point centers of each diagonal
    # translate (the centers sit at t = u-level mod 2)
    tm = np.abs(np.mod(t - np.round(u) + 1.0, 2.0) - 1.0)
    window = on_diag & (tm < data.points.b - 1e-9)
    outer = on_diag & (tm > data.points.b + 1e-9) & (banks > 0)
    if window.any() and outer.any():
        vw = mesh.vertices[window]
        vo = mesh.vertices[outer]
        report["symmetry"]["horiz_x3_spread"] = float(
            max(np.ptp(vw[:, 2]), np.ptp(vo[:, 2])) / diam)

        def direction(v):
            xy = v[:, :2] - v[:, :2].mean(axis=0)
            _, _, vt = np.linalg.svd(xy, full_matrices=False)
            return vt[0]

        dw, do = direction(vw), direction(vo)
        ang = np.arccos(np.clip(abs(float(dw @ do)), 0.0, 1.0))  # mod pi
        target = (np.pi * data.k) % np.pi
        err = min(abs(ang - target), abs(ang - (np.pi - target)))
        report["symmetry"]["horiz_angle_error"] = float(err)

    if mesh_alt is not None:
        # compare on the common (domain point, bank) pairs
        banks_alt = np.array(mesh_alt.boundary_tags.get("banks",
                                                        np.zeros(len(mesh_alt.domain_uv), dtype=int)))
        key = {(complex(z), int(bk)): i
               for i, (z, bk) in enumerate(zip(mesh.domain_uv, banks))}
        diffs = [np.linalg.norm(mesh.vertices[key[(complex(z), int(bk))]]
                                - mesh_alt.vertices[i])
                 for i, (z, bk) in enumerate(zip(mesh_alt.domain_uv, banks_alt))
                 if (complex(z), int(bk)) in key]
        report["path_independence"] = float(max(diffs))

    if check_intersections:
        si = self_intersection_check(mesh)
        report["intersections"] = {"count": len(si["intersecting_pairs"]),
                                   "candidates": si["candidates"]}

    try:
        ref = HelicoidData(k=data.k)
        devs = {f"r={r}": asymptotic_compare(data, ref, r) for r in asymptotic_radii}
        report["asymptotic"] = devs
    except Exception as exc:  # rings may be infeasible for tight cutoffs
        report["asymptotic"] = {"error": str(exc)}
    return report


def apply_screw(mesh: Mesh, k: float, copies: int,
                translation_tol: float = 1e-6) -> Mesh:
    """Concatenate screw images sigma_k^j of the mesh for j = 0..copies-1."""
    if copies < 1:
        raise ValueError("copies must be positive")
    if mesh.screw_translation and abs(mesh.screw_translation - 2.0 * np.pi * k) > \
            translation_tol * max(1.0, 2.0 * np.pi * k):
        raise ScrewMismatchError(
            f"mesh translation {mesh.screw_translation} vs requested 2*pi*k = {2 * np.pi * k}")
    angle = 2.0 * np.pi * k
    shift = 2.0 * np.pi * k
    all_v, all_f, all_uv = [], [], []
    nv = len(mesh.vertices)
    for j in range(copies):
        ca, sa = np.cos(j * angle), np.sin(j * angle)
        rot = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
        v = mesh.vertices @ rot.T
        v[:, 2] += j * shift
        all_v.append(v)
        all_f.append(mesh.faces + j * nv)
        all_uv.append(mesh.domain_uv if j == 0 else np.full(nv, np.nan, dtype=complex))
    out = Mesh(vertices=np.concatenate(all_v), faces=np.concatenate(all_f),
               domain_uv=np.concatenate(all_uv), boundary_tags=dict(mesh.boundary_tags),
               screw_angle=mesh.screw_angle, screw_translation=mesh.screw_translation)
    out.validate()
    return out


# ---- file formats ---------------------------------------------------------


def export_mesh(mesh: Mesh, fmt: str, path: str, comment: str = "") -> None:
    """Write ASCII OBJ or PLY; coordinates carry 12 significant digits."""
    if fmt == "obj":
        lines = [f"# helikon mesh v1 {comment}".rstrip()]
        for v in mesh.vertices:
            lines.append("v {:.12g} {:.12g} {:.12g}".format(*v))
        for f in mesh.faces:
            lines.append("f {} {} {}".format(f[0] + 1, f[1] + 1, f[2] + 1))
        text = "\n".join(lines) + "\n"
    elif fmt == "ply":
        head = ["ply", "format ascii 1.0", f"comment helikon mesh v1 {comment}".rstrip(),
                f"element vertex {len(mesh.vertices)}",
                "property float x", "property float y", "property float z",
                f"element face {len(mesh.faces)}",
                "property list uchar int vertex_indices", "end_header"]
        body = ["{:.12g} {:.12g} {:.12g}".format(*v) for v in mesh.vertices]
        body += ["3 {} {} {}".format(*f) for f in mesh.faces]
        text = "\n".join(head + body) + "\n"
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def read_obj(path: str) -> Mesh:
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return Mesh(vertices=np.array(verts).reshape(-1, 3),
                faces=np.array(faces, dtype=int).reshape(-1, 3),
                domain_uv=np.full(len(verts), np.nan, dtype=complex))


# ---- self-intersection ----------------------------------------------------


def self_intersection_check(mesh: Mesh, grid_cell: float | None = None,
                            tol: float = 1e-10) -> dict:
    """Spatial-hash broad phase plus exact triangle-triangle narrow phase.

    Pairs sharing a mesh vertex are skipped (they touch by construction), as
    are degenerate triangles (reported separately).  Returns a dict with the
    intersecting pair list.
    """
    V, F = mesh.vertices, mesh.faces
    tri = V[F]                                    # (M, 3, 3)
    area2 = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    degenerate = np.nonzero(area2 < 1e-14)[0]
    lo = tri.min(axis=1)
    hi = tri.max(axis=1)
    if grid_cell is None:
        grid_cell = 2.0 * float(np.median(hi - lo)) + 1e-12

    buckets: dict = {}
    for m in range(len(F)):
        if area2[m] < 1e-14:
            continue
        c0 = np.floor(lo[m] / grid_cell).astype(int)
        c1 = np.floor(hi[m] / grid_cell).astype(int)
        for ix in range(c0[0], c1[0] + 1):
            for iy in range(c0[1], c1[1] + 1):
                for iz in range(c0[2], c1[2] + 1):
                    buckets.setdefault((ix, iy, iz), []).append(m)

    cand = set()
    for members in buckets.values():
        for ii in range(len(members)):
            for jj in range(ii + 1, len(members)):
                a, b = members[ii], members[jj]
                cand.add((a, b) if a < b else (b, a))

    share = {}
    pairs = []
    for a, b in cand:
        if set(F[a]) & set(F[b]):
            continue
        if np.any(lo[a] > hi[b] + tol) or np.any(lo[b] > hi[a] + tol):
            continue
        pairs.append((a, b))

    hits = [p for p in pairs if _tri_tri_intersect(tri[p[0]], tri[p[1]], tol)]
    return {"intersecting_pairs": hits, "candidates": len(pairs),
            "degenerate_skipped": degenerate.tolist()}


def _tri_tri_intersect(T1, T2, tol) -> bool:
    n2 = np.cross(T2[1] - T2[0], T2[2] - T2[0])
    d1 = (T1 - T2[0]) @ n2
    if np.all(d1 > tol) or np.all(d1 < -tol):
        return False
    n1 = np.cross(T1[1] - T1[0], T1[2] - T1[0])
    d2 = (T2 - T1[0]) @ n1
    if np.all(d2 > tol) or np.all(d2 < -tol):
        return False
    scale = max(np.abs(d1).max(), np.abs(d2).max())
    if scale < tol * max(np.linalg.norm(n1), np.linalg.norm(n2)):
        return _coplanar_overlap(T1, T2, n1, tol)
    # proper crossing: some edge of one pierces the other
    for A, B in ((T1, T2), (T2, T1)):
        for e in range(3):
            if _segment_hits_triangle(A[e], A[(e + 1) % 3], B, tol):
                return True
    return False


def _segment_hits_triangle(p, q, T, tol) -> bool:
    d = q - p
    e1 = T[1] - T[0]
    e2 = T[2] - T[0]
    h = np.cross(d, e2)
    a = e1 @ h
    if abs(a) < 1e-300:
        return False
    f = 1.0 / a
    s = p - T[0]
    u = f * (s @ h)
    if u < tol or u > 1 - tol:
        return False
    qv = np.cross(s, e1)
    v = f * (d @ qv)
    if v < tol or u + v > 1 - tol:
        return False
    t = f * (e2 @ qv)
    return tol < t < 1 - tol


def _coplanar_overlap(T1, T2, n, tol) -> bool:
    # project to the dominant plane and run 2D separating axes
    ax = np.argmax(np.abs(n))
    cols = [c for c in range(3) if c != ax]
    A = T1[:, cols]
    B = T2[:, cols]
    for P, Q in ((A, B), (B, A)):
        for e in range(3):
            edge = P[(e + 1) % 3] - P[e]
            normal = np.array([-edge[1], edge[0]])
            pa = (P - P[e]) @ normal
            qa = (Q - P[e]) @ normal
            if qa.min() >= pa.max() - tol or qa.max() <= pa.min() + tol:
                return False
    return True


# ---- helicoid reference mesh ------------------------------------------------


def helicoid_mesh(k: float, resolution: int = 64, r_inner: float = 0.2,
                  r_outer: float = 5.0, verify: bool = False):
    """Mesh of one screw period of the helicoid quotient, from the closed form.

    The grid lives on the log cover w = log z with Im w in [0, 2*pi]; with
    `verify` the closed form is also checked against numeric integration of
    the defining forms along the grid rows (max deviation returned).
    """
    hel = HelicoidData(k=float(k))
    n = int(resolution)
    re_w = np.linspace(np.log(r_inner), np.log(r_outer), n + 1)
    im_w = np.linspace(0.0, 2.0 * np.pi, n + 1)
    W = re_w[:, None] + 1j * im_w[None, :]
    X = hel.immerse_w(W)

    verts = X.reshape(-1, 3)
    uv = np.exp(W).reshape(-1)
    faces = []
    idx = np.arange((n + 1) * (n + 1)).reshape(n + 1, n + 1)
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            faces.append([a, b, c])
            faces.append([a, c, d])
    mesh = Mesh(vertices=verts, faces=np.array(faces, dtype=int),
                domain_uv=uv, boundary_tags={"helicoid": True, "resolution": n},
                screw_angle=2.0 * np.pi * k, screw_translation=2.0 * np.pi * k)
    mesh.validate()
    if not verify:
        return mesh

    err = helicoid_closed_form_error(hel, W.reshape(-1)[:: max(1, W.size // 400)])
    return mesh, err


def helicoid_closed_form_error(hel: HelicoidData, w_samples) -> float:
    """Max |X_numeric - X_closed| over the samples, integrating from w = 0.

    The numeric side integrates (1/2(g-1/g), i/2(g+1/g), 1) dh along the
    straight segment in the w chart (where dh = i*k*dw).
    """
    w_samples = np.asarray(w_samples, dtype=complex).ravel()
    t = 0.5 + 0.5 * _EGX
    wts = 0.5 * _EGW
    worst = 0.0
    for w1 in w_samples:
        ws = w1 * t
        g = 1j * np.exp(hel.k * ws)
        dh = 1j * hel.k * np.ones_like(ws)
        rows = np.stack([0.5 * (g - 1.0 / g) * dh,
                         0.5j * (g + 1.0 / g) * dh,
                         dh])
        # one Gauss panel is exact to machine precision only for short spans;
        # split long segments
        npan = max(1, int(np.ceil(abs(w1) / 0.5)))
        vec = np.zeros(3, dtype=complex)
        for p in range(npan):
            a = w1 * p / npan
            b = w1 * (p + 1) / npan
            ws = a + (b - a) * t
            g = 1j * np.exp(hel.k * ws)
            dh = 1j * hel.k * np.ones_like(ws)
            rows = np.stack([0.5 * (g - 1.0 / g) * dh,
                             0.5j * (g + 1.0 / g) * dh,
                             dh])
            vec += (rows * (wts * (b - a))).sum(axis=1)
        x_num = np.real(vec)
        x_cf = hel.immerse_w(np.array([w1]))[0]
        worst = max(worst, float(np.max(np.abs(x_num - x_cf))))
    return worst


# ---- end asymptotics -------------------------------------------------------


def asymptotic_compare(data: WeierstrassData, helicoid_ref: HelicoidData,
                       ring_radius: float, n_ring: int = 96,
                       end_cutoff: float = 0.0) -> float:
    """Deviation (in units of the screw pitch) between the immersed ring
    around E1 and the best screw-aligned helicoid ring of matching girth.

    Alignment optimizes a rotation about the vertical axis plus a vertical
    shift; the horizontal center is matched by centroid.  The returned value
    decreases toward the end for genuinely helicoidal ends and saturates or
    grows when the end's screw axis is tilted (unsolved data).
    """
    if end_cutoff and ring_radius <= end_cutoff:
        raise GeometryError("ring would intersect the end cutoff disk")
    k = data.k
    res1, _ = end_residue(data, 1)
    scale = 2.0 * np.pi * k / abs(np.real(res1))

    # integrate X around the ring, starting from the point nearest the center
    E1 = data.points.E1
    start = E1 + ring_radius * np.exp(1j * np.angle(data.torus.center - E1))
    phis = np.angle(data.torus.center - E1) + np.linspace(0.0, 2.0 * np.pi, n_ring, endpoint=False)
    zs = E1 + ring_radius * np.exp(1j * phis)
    anchors = data.branch_at(start).term_logs
    X = [np.zeros(3)]
    prev = start
    for z in list(zs[1:]) + [start + 0j]:
        # arc step approximated by its chord; the integral is path-exact anyway
        vec, anchors = _integrate_edge(data, prev, z, anchors)
        X.append(X[-1] + np.real(vec))
        prev = z
    ring = scale * np.array(X[:-1])

    pitch = 2.0 * np.pi * k
    girth = np.median(np.hypot(ring[:, 0] - ring[:, 0].mean(),
                               ring[:, 1] - ring[:, 1].mean()))
    # helicoid model ring of the same median girth (one full 2*pi*k turn)
    r_h = girth
    t = np.linspace(0.0, 2.0 * np.pi, n_ring, endpoint=False)
    href = np.stack([r_h * np.cos(k * t), -r_h * np.sin(k * t), -k * t], axis=1)
    if helicoid_ref is not None and abs(helicoid_ref.k - k) > 1e-12:
        raise ValueError("helicoid reference twist does not match the data")

    a = ring - np.array([ring[:, 0].mean(), ring[:, 1].mean(), 0.0])
    best = np.inf
    for psi in np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False):
        ca, sa = np.cos(psi), np.sin(psi)
        rot = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
        cand = href @ rot.T
        dz = np.median(a[:, 2]) - np.median(cand[:, 2])
        cand = cand + np.array([0.0, 0.0, dz])
        d = np.sqrt(((a[:, None, :] - cand[None, :, :]) ** 2).sum(-1)).min(axis=1).max()
        best = min(best, float(d))
    return best / pitch
