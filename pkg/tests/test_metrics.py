import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from meshrmp.bench.metrics import (
    length_ratio,
    polyline_length,
    resample_polyline,
    sample_surface_point,
    segment_similarities,
    smoothness,
    surface_distance_profile,
)
from meshrmp.errors import DegenerateTrajectory, ZeroGeodesic
from meshrmp.geodesic import build_geodesic_graph, shortest_surface_path
from meshrmp.mesh import TriMesh
from meshrmp.mesh.shapes import grid_square
from meshrmp.mesh.spatial import SpatialIndex
from meshrmp.mesh.trimesh import SurfacePoint

from oracles import angular_similarity_loop


def test_sample_single_face():
    tri = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    rng = np.random.default_rng(0)
    for _ in range(50):
        sp = sample_surface_point(tri, rng)
        assert sp.face == 0
        assert min(sp.bary) >= 0 and sum(sp.bary) == pytest.approx(1.0, abs=1e-15)


def test_sample_area_weighting():
    # face 0 has area 0.5, face 1 has area 1.5
    V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 3, 0]]
    m = TriMesh(V, [[0, 1, 2], [1, 3, 2]])
    assert m.face_areas[1] / m.face_areas[0] == pytest.approx(3.0)
    rng = np.random.default_rng(11)
    n = 100_000
    hits = sum(sample_surface_point(m, rng).face == 1 for _ in range(n))
    assert abs(hits / n - 0.75) <= 0.02
    # chi-square against the area weights, 1 dof, 99.9% quantile 10.83
    exp = np.array([0.25, 0.75]) * n
    obs = np.array([n - hits, hits])
    assert ((obs - exp) ** 2 / exp).sum() < 10.83


def test_sample_uniform_within_face():
    """Sub-triangle hit rates match their area fractions (square-root warp)."""
    tri = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    rng = np.random.default_rng(2)
    b = np.array([sample_surface_point(tri, rng).bary for _ in range(40_000)])
    # the corner triangle b0 > 0.5 covers a quarter of the face
    assert abs((b[:, 0] > 0.5).mean() - 0.25) < 0.01
    assert abs((b[:, 1] > 0.5).mean() - 0.25) < 0.01


def test_sample_deterministic(wavy):
    a = [sample_surface_point(wavy, np.random.default_rng(5)) for _ in range(3)]
    r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
    assert [sample_surface_point(wavy, r1) for _ in range(20)] == [sample_surface_point(wavy, r2) for _ in range(20)]
    assert a[0] == a[1] == a[2]


def test_smoothness_examples():
    straight = np.column_stack([np.linspace(0, 1, 11), np.zeros(11), np.zeros(11)])
    assert smoothness(straight) == pytest.approx(1.0, abs=1e-12)
    stairs = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [2, 1, 0], [2, 2, 0], [3, 2, 0]], float)
    assert smoothness(stairs) == pytest.approx(0.5, abs=1e-12)
    uturn = np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], float)
    assert smoothness(uturn) == pytest.approx(0.0, abs=1e-12)


def test_smoothness_skips_zero_segments_and_errors():
    p = np.array([[0, 0, 0], [1, 0, 0], [1, 0, 0], [2, 0, 0]], float)
    assert smoothness(p) == 1.0
    with pytest.raises(DegenerateTrajectory):
        smoothness(np.array([[0, 0, 0], [1, 0, 0]], float))
    with pytest.raises(DegenerateTrajectory):
        smoothness(np.zeros((5, 3)))


@given(st.lists(st.tuples(*[st.floats(-5, 5)] * 3), min_size=3, max_size=30))
def test_smoothness_matches_loop_oracle(pts):
    pts = np.array(pts)
    try:
        rho = segment_similarities(pts)
    except DegenerateTrajectory:
        return
    assert np.all((rho >= 0) & (rho <= 1))
    assert rho.mean() == pytest.approx(angular_similarity_loop(pts), abs=1e-9)


def test_resample_count_and_spacing():
    p = np.array([[0, 0, 0], [0.237, 0, 0], [0.237, 0.5, 0]])
    q = resample_polyline(p)
    assert len(q) == math.floor(0.737 / 0.01) + 1
    steps = np.linalg.norm(np.diff(q, axis=0), axis=1)
    # spacing is exact on straight runs; the corner sample cuts across
    assert np.allclose(steps[:23], 0.01)
    assert len(resample_polyline(p[:1])) == 1


def test_surface_distance_on_and_off_flat_mesh():
    m = grid_square(4, size=2.0)
    idx = SpatialIndex(m)
    line = np.column_stack([np.linspace(0.1, 1.9, 50), np.linspace(0.2, 1.5, 50), np.zeros(50)])
    prof = surface_distance_profile(line, idx)
    assert prof["mean"] < 1e-9 and prof["max"] < 1e-9
    up = line + [0, 0, 0.005]
    prof = surface_distance_profile(up, m)
    assert prof["mean"] == pytest.approx(5.0, abs=1e-9)
    assert prof["max"] == pytest.approx(5.0, abs=1e-9)
    assert len(prof["samples"]) == math.floor(polyline_length(up) / 0.01) + 1
    with pytest.raises(ValueError):
        surface_distance_profile(np.zeros((0, 3)), idx)


def test_length_ratio():
    m = grid_square(4)
    g = build_geodesic_graph(m, 4)
    # the origin corner and the vertex (0.75, 1)
    s, t = SurfacePoint(0, (1, 0, 0)), SurfacePoint(m.n_faces - 1, (0, 0, 1))
    a, b = m.vertices[m.faces[0][0]], m.vertices[m.faces[-1][2]]
    poly, length = shortest_surface_path(g, m, s, t)
    assert length_ratio(poly, length) == pytest.approx(1.0, rel=1e-12)
    straight = np.linspace(a, b, 30)
    assert length_ratio(straight, length) == pytest.approx(1.0, abs=0.01)
    with pytest.raises(ZeroGeodesic):
        length_ratio(straight, 0.0)
