import numpy as np
import pytest
from scipy.spatial import ConvexHull

from conftest import sinusoid_disc
from meshrmp.errors import DegenerateAngle, MismatchedMeshes, SolverDivergence, TopologyError
from meshrmp.mesh import TriMesh
from meshrmp.mesh.shapes import grid_square, hemisphere, hex_disc, hex_fan, icosphere
from meshrmp.parametrization import (
    FlatMesh,
    WeightScheme,
    compute_interior_weights,
    extract_boundary_loop,
    flatten,
    map_boundary_to_circle,
    map_boundary_to_square,
    solve_flattening,
    validate_parametrization,
)
from oracles import dense_flatten, mean_value_weights_loop

SCHEMES = [WeightScheme.UNIFORM, WeightScheme.MEAN_VALUE]


def test_scheme_parse():
    assert WeightScheme.parse("tutte") is WeightScheme.UNIFORM
    assert WeightScheme.parse("uniform") is WeightScheme.UNIFORM
    assert WeightScheme.parse("meanvalue") is WeightScheme.MEAN_VALUE
    assert WeightScheme.parse("mean_value") is WeightScheme.MEAN_VALUE
    with pytest.raises(ValueError):
        WeightScheme.parse("authalic")


# --- boundary ------------------------------------------------------------------

def test_boundary_loop_single_triangle():
    m = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    assert extract_boundary_loop(m).tolist() == [0, 1, 2]


def test_boundary_loop_square(unit_square):
    loop = extract_boundary_loop(unit_square)
    assert sorted(loop.tolist()) == [0, 1, 2, 3] and loop[0] == 0


def test_boundary_loop_closed_mesh():
    with pytest.raises(TopologyError):
        extract_boundary_loop(icosphere(1))


def test_boundary_loop_follows_winding(hemi, wavy, grid10):
    for m in (hemi, wavy, grid10):
        loop = extract_boundary_loop(m)
        assert loop[0] == loop.min()
        directed = set(map(tuple, np.column_stack([m.faces.ravel(), np.roll(m.faces, -1, axis=1).ravel()])))
        for a, b in zip(loop, np.roll(loop, -1)):
            assert (a, b) in directed


def test_circle_equal_edges(unit_square):
    uv = map_boundary_to_circle(extract_boundary_loop(unit_square), unit_square)
    ang = np.degrees(np.arctan2(uv[:, 1], uv[:, 0])) % 360
    np.testing.assert_allclose(ang, [0, 90, 180, 270], atol=1e-12)


def test_circle_proportional_arcs():
    src = TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]], validate=False)
    uv = map_boundary_to_circle([0, 1, 2], src)
    ang = np.degrees(np.arctan2(uv[:, 1], uv[:, 0])) % 360
    np.testing.assert_allclose(ang, [0, 90, 180], atol=1e-12)


def test_circle_radius(hemi):
    uv = map_boundary_to_circle(extract_boundary_loop(hemi), hemi)
    np.testing.assert_allclose(np.hypot(uv[:, 0], uv[:, 1]), 1.0, atol=1e-15)


def test_square_boundary_on_square(hemi):
    uv = map_boundary_to_square(extract_boundary_loop(hemi), hemi)
    np.testing.assert_allclose(np.abs(uv).max(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(uv[0], [1.0, 0.0])
    flat = flatten(hemi, boundary_shape="square")
    assert flat.foldovers() == 0


# --- weights -------------------------------------------------------------------

def test_uniform_weights_all_one(hemi):
    W = compute_interior_weights(hemi, WeightScheme.UNIFORM)
    np.testing.assert_array_equal(W.data, 1.0)
    loop = set(extract_boundary_loop(hemi).tolist())
    rows = set(np.repeat(np.arange(hemi.n_vertices), np.diff(W.indptr)).tolist())
    assert rows == set(range(hemi.n_vertices)) - loop
    for i in list(rows)[:50]:
        assert W.indices[W.indptr[i]:W.indptr[i + 1]].tolist() == hemi.vertex_neighbors[i]


def test_mean_value_symmetric_fan():
    W = compute_interior_weights(hex_fan(1.0, z=0.2, center_z=0.5), WeightScheme.MEAN_VALUE)
    row = W.getrow(0).data
    assert len(row) == 6
    np.testing.assert_allclose(row, row[0], rtol=1e-12)


def test_mean_value_equilateral_star():
    W = compute_interior_weights(hex_fan(1.0), WeightScheme.MEAN_VALUE)
    np.testing.assert_allclose(W.getrow(0).data, 2 * np.tan(np.radians(30)), rtol=1e-12)
    assert 2 * np.tan(np.radians(30)) == pytest.approx(1.1547, abs=1e-4)


@pytest.mark.parametrize("name", ["hemisphere", "sinusoid"])
def test_mean_value_matches_loop_oracle(test_meshes, name):
    m = test_meshes[name]
    W = compute_interior_weights(m, WeightScheme.MEAN_VALUE).tocoo()
    ref = mean_value_weights_loop(m.vertices, m.faces.tolist())
    interior = set(range(m.n_vertices)) - set(extract_boundary_loop(m).tolist())
    ref = {k: v for k, v in ref.items() if k[0] in interior}
    got = {(int(i), int(j)): float(w) for i, j, w in zip(W.row, W.col, W.data)}
    assert got.keys() == ref.keys()
    for k, v in ref.items():
        assert got[k] == pytest.approx(v, rel=1e-12)
    assert min(got.values()) > 0


def test_degenerate_angle():
    eps = 1e-9
    m = TriMesh([[0, eps, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0]], [[0, 1, 2], [0, 2, 3], [3, 1, 0]])
    with pytest.raises(DegenerateAngle):
        compute_interior_weights(m, WeightScheme.MEAN_VALUE)
    compute_interior_weights(m, WeightScheme.UNIFORM)


# --- solve ---------------------------------------------------------------------

@pytest.mark.parametrize("scheme, centre", [(WeightScheme.UNIFORM, [0.3, -0.2, 0.7]),
                                            (WeightScheme.MEAN_VALUE, [0.0, 0.0, 0.7])])
def test_single_interior_vertex_centered(scheme, centre):
    # uniform weights ignore geometry; mean-value weights need a symmetric star
    m = TriMesh([centre, [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]],
                [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]])
    flat = flatten(m, scheme)
    np.testing.assert_allclose(flat.vertices[0], [0, 0], atol=1e-12)


def test_no_interior_vertices():
    m = TriMesh([[0, 0, 0], [2, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    flat = flatten(m)
    loop = extract_boundary_loop(m)
    np.testing.assert_allclose(flat.vertices[loop], map_boundary_to_circle(loop, m))


@pytest.mark.parametrize("scheme", SCHEMES)
def test_planar_disc_no_foldovers(scheme):
    v, f = hex_disc(12)
    rng = np.random.default_rng(4)
    v = v * [1.5, 0.7] + 0.005 * rng.normal(size=v.shape) * (np.linalg.norm(v, axis=1) < 0.99)[:, None]
    m = TriMesh(np.column_stack([v, np.zeros(len(v))]), f)
    flat = flatten(m, scheme)
    assert flat.foldovers() == 0
    assert np.all(flat.signed_areas > 0)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("name", ["grid", "hemisphere", "sinusoid"])
def test_solve_matches_dense_oracle(test_meshes, name, scheme):
    m = test_meshes[name]
    loop = extract_boundary_loop(m)
    b_uv = map_boundary_to_circle(loop, m)
    W = compute_interior_weights(m, scheme)
    uv, _, _ = solve_flattening(m, b_uv, W, boundary=loop)
    coo = W.tocoo()
    ref = dense_flatten(m.vertices, m.faces, loop, b_uv,
                        {(int(i), int(j)): float(w) for i, j, w in zip(coo.row, coo.col, coo.data)})
    np.testing.assert_allclose(uv, ref, atol=1e-8)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_convex_combination_residual(wavy, scheme):
    flat = flatten(wavy, scheme)
    W = compute_interior_weights(wavy, scheme)
    lam = W.multiply(1.0 / np.maximum(W.sum(axis=1), 1e-300)).tocsr()
    inner = np.diff(W.indptr) > 0
    res = (lam @ flat.vertices - flat.vertices)[inner]
    assert np.abs(res).max() < 1e-9


def test_interior_inside_one_ring_hull(hemi):
    flat = flatten(hemi)
    loop = set(flat.boundary.tolist())
    for i in range(hemi.n_vertices):
        if i in loop:
            continue
        ring = flat.vertices[hemi.vertex_neighbors[i]]
        hull = ConvexHull(ring)
        assert np.all(hull.equations[:, :2] @ flat.vertices[i] + hull.equations[:, 2] < 0)


def test_uniform_solution_keeps_symmetry():
    v, f = hex_disc(6)
    r2 = (v ** 2).sum(axis=1)
    m = TriMesh(np.column_stack([v, 0.4 * r2]), f)
    flat = flatten(m, WeightScheme.UNIFORM)
    c, s = np.cos(np.pi / 3), np.sin(np.pi / 3)
    rot = flat.vertices @ np.array([[c, s], [-s, c]])
    d = np.linalg.norm(rot[:, None, :] - flat.vertices[None, :, :], axis=2).min(axis=1)
    assert d.max() < 1e-9
    np.testing.assert_allclose(flat.vertices[0], [0, 0], atol=1e-9)


def test_flatten_deterministic(wavy):
    a = flatten(wavy)
    b = flatten(wavy)
    assert np.array_equal(a.vertices, b.vertices)


def test_solver_divergence():
    m = sinusoid_disc(rings=25)
    loop = extract_boundary_loop(m)
    with pytest.raises(SolverDivergence):
        solve_flattening(m, map_boundary_to_circle(loop, m), compute_interior_weights(m), boundary=loop,
                         max_iter=1)


# --- validation ----------------------------------------------------------------

def test_flat_mesh_invariants(test_meshes):
    for m in test_meshes.values():
        flat = flatten(m)
        assert isinstance(flat, FlatMesh)
        assert np.array_equal(flat.faces, m.faces)
        assert flat.n_vertices == m.n_vertices
        assert flat.boundary_radius_error() < 1e-9
        assert flat.foldovers() == 0


def _triangles_overlap(A, B):
    """Separating-axis test for 2D triangles, open interiors only."""
    for T in (A, B):
        for i in range(3):
            e = T[(i + 1) % 3] - T[i]
            n = np.array([-e[1], e[0]])
            pa, pb = A @ n, B @ n
            if pa.max() <= pb.min() + 1e-12 or pb.max() <= pa.min() + 1e-12:
                return False
    return True


def test_flattened_faces_do_not_overlap(hemi):
    flat = flatten(hemi)
    assert hemi.n_faces < 1000
    T = flat.vertices[flat.faces]
    lo, hi = T.min(axis=1), T.max(axis=1)
    for i in range(len(T)):
        cand = np.nonzero(np.all(lo[i + 1:] < hi[i], axis=1) & np.all(hi[i + 1:] > lo[i], axis=1))[0] + i + 1
        for j in cand:
            assert not _triangles_overlap(T[i], T[j]), (i, j)


def test_validate_identity_case():
    v, f = hex_disc(8)
    theta = 0.7
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    m3 = TriMesh(np.column_stack([v @ R.T, np.zeros(len(v))]), f)
    rep = validate_parametrization(m3, TriMesh(v, f))
    assert rep.foldovers == 0
    assert rep.angular_distortion_deg["max"] < 1e-9
    assert rep.qc_ratio["max"] == pytest.approx(1.0, abs=1e-9)
    # flattening a planar unit disc reproduces it (mean-value weights are linearly exact)
    rep = validate_parametrization(TriMesh(np.column_stack([v, np.zeros(len(v))]), f), flatten(TriMesh(np.column_stack([v, np.zeros(len(v))]), f)))
    assert rep.angular_distortion_deg["max"] < 1e-6


def test_validate_report_keys(wavy):
    rep = validate_parametrization(wavy, flatten(wavy)).as_dict()
    assert {"foldovers", "angular_distortion_deg", "qc_ratio", "solve_seconds"} <= set(rep)
    for k in ("angular_distortion_deg", "qc_ratio"):
        assert set(rep[k]) == {"min", "mean", "max"}
    assert rep["qc_ratio"]["min"] >= 1.0


def test_validate_mismatched(grid10, hemi):
    with pytest.raises(MismatchedMeshes):
        validate_parametrization(grid10, flatten(hemi))


def test_mean_value_beats_tutte_on_hemisphere():
    m = hemisphere(rings=12, jitter=0.3, seed=2)
    mv = validate_parametrization(m, flatten(m, WeightScheme.MEAN_VALUE))
    tu = validate_parametrization(m, flatten(m, WeightScheme.UNIFORM))
    assert mv.angular_distortion_deg["mean"] <= tu.angular_distortion_deg["mean"]


def test_grid_flatten_square_grid():
    m = grid_square(6, 2.0)
    flat = flatten(m)
    assert flat.foldovers() == 0 and flat.boundary_radius_error() < 1e-12
