import numpy as np
import pytest

from helikon.surface import (Mesh, apply_screw, asymptotic_compare, export_mesh,
                             helicoid_closed_form_error, helicoid_mesh, immerse,
                             mesh_report, read_obj, self_intersection_check,
                             UnsolvedDataError)
from helikon.weierstrass import HelicoidData, data_for, metric_ds

RES = 32
CUT = 0.06


@pytest.fixture(scope="module")
def h1_data(h1):
    return data_for(h1.theta_angle, 1.0, h1.b)


@pytest.fixture(scope="module")
def h1_mesh(h1_data):
    return immerse(h1_data, resolution=RES, end_cutoff=CUT)


@pytest.fixture(scope="module")
def h1_mesh_alt(h1_data):
    return immerse(h1_data, resolution=RES, end_cutoff=CUT, tree_order=1)


def test_base_point_maps_to_origin(h1_data, h1_mesh):
    i = np.argmin(np.abs(h1_mesh.domain_uv - h1_data.torus.center))
    assert abs(h1_mesh.domain_uv[i] - h1_data.torus.center) < 1e-12
    assert np.linalg.norm(h1_mesh.vertices[i]) < 1e-12


def test_unsolved_data_rejected():
    d = data_for(1.6, 1.0, 0.8)
    with pytest.raises(UnsolvedDataError):
        immerse(d, resolution=8)
    immerse(d, resolution=8, force=True)


def test_axis_and_horizontal_lines(h1_data, h1_mesh, h1_mesh_alt):
    rep = mesh_report(h1_data, h1_mesh, mesh_alt=h1_mesh_alt,
                      check_intersections=False, asymptotic_radii=())
    assert rep["symmetry"]["axis_max_xy"] < 1e-5
    assert rep["symmetry"]["horiz_x3_spread"] < 1e-5
    assert rep["symmetry"]["horiz_angle_error"] < 1e-3
    assert rep["path_independence"] < 1e-8


def test_screw_translation_normalized(h1_mesh):
    assert h1_mesh.screw_translation == pytest.approx(2 * np.pi, abs=1e-12)


def test_face_edge_lengths_match_metric(h1_data, h1_mesh):
    # first-order consistency between embedded edges and the conformal factor;
    # the induced arc density is half of |g dh| + |dh/g|
    V, F = h1_mesh.vertices, h1_mesh.faces
    uv = h1_mesh.domain_uv
    from helikon.periods import end_residue
    r1, _ = end_residue(h1_data, 1)
    scale = 2 * np.pi / abs(np.real(r1))
    rels = []
    rng = np.random.default_rng(3)
    for f in rng.choice(len(F), 200, replace=False):
        i, j = F[f][0], F[f][1]
        dz = uv[j] - uv[i]
        if abs(dz) > 0.08:           # seam or wrap pair, not a geometric edge
            continue
        mid = 0.5 * (uv[i] + uv[j])
        pred = 0.5 * scale * float(metric_ds(h1_data, mid)) * abs(dz)
        got = np.linalg.norm(V[j] - V[i])
        rels.append(abs(got - pred) / pred)
    rels = np.array(rels)
    assert len(rels) > 100
    # discretization error shrinks with the grid; the bulk is already tight
    assert np.median(rels) < 0.02
    assert rels.max() < 0.08


def test_normal_symmetry_of_image(h1_data, h1_mesh):
    # half-turn about the normal line at the center: (x1,x2,x3) -> (x1,-x2,-x3)
    from helikon.torus import symmetry_images
    V, uv = h1_mesh.vertices, h1_mesh.domain_uv
    banks = np.array(h1_mesh.boundary_tags["banks"])
    diam = h1_mesh.diameter()
    lookup = {}
    for i, (z, bk) in enumerate(zip(uv, banks)):
        lookup[(round(z.real, 9), round(z.imag, 9), int(bk))] = i
    checked = 0
    for i, (z, bk) in enumerate(zip(uv, banks)):
        if bk != 0:
            continue
        w = symmetry_images(h1_data.torus, z)["rho"]
        # reduce to the fundamental cell
        tau = h1_data.torus.tau
        for m in range(-2, 3):
            for n in range(-2, 3):
                key = (round((w + m + n * tau).real, 9), round((w + m + n * tau).imag, 9), 0)
                if key in lookup:
                    j = lookup[key]
                    img = np.array([V[i][0], -V[i][1], -V[i][2]])
                    assert np.linalg.norm(V[j] - img) < 1e-5 * diam
                    checked += 1
                    break
    assert checked > 100


def test_self_intersection_planar_grid():
    xs, ys = np.meshgrid(np.arange(5.0), np.arange(5.0))
    verts = np.stack([xs.ravel(), ys.ravel(), np.zeros(25)], axis=1)
    faces = []
    idx = np.arange(25).reshape(5, 5)
    for i in range(4):
        for j in range(4):
            faces.append([idx[i, j], idx[i + 1, j], idx[i + 1, j + 1]])
            faces.append([idx[i, j], idx[i + 1, j + 1], idx[i, j + 1]])
    mesh = Mesh(vertices=verts, faces=np.array(faces),
                domain_uv=np.full(25, np.nan, dtype=complex))
    out = self_intersection_check(mesh)
    assert out["intersecting_pairs"] == []


def test_self_intersection_positive_control():
    # two interpenetrating sheets
    verts = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0],
                      [0.5, 0.5, -1], [0.5, 0.5, 1], [1.5, 1.5, 0.2]], float)
    faces = np.array([[0, 1, 2], [3, 4, 5]])
    mesh = Mesh(vertices=verts, faces=faces,
                domain_uv=np.full(6, np.nan, dtype=complex))
    out = self_intersection_check(mesh)
    assert len(out["intersecting_pairs"]) == 1


def test_h1_mesh_embedded_spot_check(h1_mesh):
    out = self_intersection_check(h1_mesh)
    assert out["intersecting_pairs"] == []


def test_apply_screw_identity_and_copies(h1_mesh):
    one = apply_screw(h1_mesh, 1.0, 1)
    assert np.array_equal(one.vertices, h1_mesh.vertices)
    three = apply_screw(h1_mesh, 1.0, 3)
    assert len(three.vertices) == 3 * len(h1_mesh.vertices)
    z = three.vertices[:, 2]
    expect = np.ptp(h1_mesh.vertices[:, 2]) + 2 * (2 * np.pi)
    assert np.ptp(z) == pytest.approx(expect, rel=1e-9)


def test_helicoid_screw_invariance():
    mesh = helicoid_mesh(1.0, resolution=16)
    two = apply_screw(mesh, 1.0, 2)
    n = len(mesh.vertices)
    shifted = mesh.vertices + np.array([0.0, 0.0, 2 * np.pi])
    assert np.abs(two.vertices[n:] - shifted).max() < 1e-8


def test_helicoid_mesh_verified():
    mesh, err = helicoid_mesh(2.5, resolution=16, verify=True)
    assert err < 1e-8


def test_helicoid_closed_form_oracle(rng):
    for k in (1.0, 2.0, 2.5):
        w = rng.uniform(-1.5, 1.5, 48) + 1j * rng.uniform(-3, 3, 48)
        assert helicoid_closed_form_error(HelicoidData(k=k), w) < 1e-8


def test_export_roundtrip(tmp_path, h1_mesh):
    path = str(tmp_path / "m.obj")
    export_mesh(h1_mesh, "obj", path)
    back = read_obj(path)
    assert np.abs(back.vertices - h1_mesh.vertices).max() < 1e-9
    assert np.array_equal(back.faces, h1_mesh.faces)


def test_export_empty_and_unit_triangle(tmp_path):
    empty = Mesh(vertices=np.zeros((0, 3)), faces=np.zeros((0, 3), dtype=int),
                 domain_uv=np.zeros(0, dtype=complex))
    export_mesh(empty, "obj", str(tmp_path / "e.obj"))
    export_mesh(empty, "ply", str(tmp_path / "e.ply"))
    assert read_obj(str(tmp_path / "e.obj")).vertices.shape == (0, 3)

    tri = Mesh(vertices=np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]),
               faces=np.array([[0, 1, 2]]),
               domain_uv=np.zeros(3, dtype=complex))
    p = str(tmp_path / "t.obj")
    export_mesh(tri, "obj", p)
    back = read_obj(p)
    assert np.array_equal(back.vertices, tri.vertices)


def test_asymptotic_self_comparison():
    hel = HelicoidData(k=1.0)
    # a helicoid ring compared against the helicoid model is near zero once
    # built from the same data; here we use the numeric H1 machinery instead
    # (exact self-test lives in helicoid_closed_form_error)
    assert helicoid_closed_form_error(hel, np.array([0.3 + 0.2j])) < 1e-12


def test_asymptotic_deviation_decreases(h1_data):
    d1 = asymptotic_compare(h1_data, HelicoidData(k=1.0), 0.1)
    d2 = asymptotic_compare(h1_data, HelicoidData(k=1.0), 0.05)
    assert d2 < d1


def test_asymptotic_unsolved_data_still_measurable():
    # unsolved placements keep a genuinely helicoidal end (the forms' poles
    # do not move), so the deviation stays finite and well-defined there;
    # ring-local quantities cannot distinguish solved from unsolved data
    bad = data_for(1.55, 1.0, 0.8)
    d1 = asymptotic_compare(bad, HelicoidData(k=1.0), 0.1)
    assert np.isfinite(d1) and d1 > 0
