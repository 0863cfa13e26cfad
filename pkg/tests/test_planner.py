import csv

import numpy as np
import pytest

from meshrmp.errors import GoalOutsideDisc, NonFiniteState
from meshrmp.manifold import ManifoldPair, map_3d_to_task
from meshrmp.mesh.shapes import grid_square
from meshrmp.parametrization import flatten
from meshrmp.rmp.planner import (
    CSV_COLUMNS,
    DT,
    POS_TOL,
    REST_SPEED,
    Status,
    default_max_steps,
    integrate,
)
from meshrmp.rmp.policies import FOLLOW_DEFAULT, PERP_DEFAULT, PolicyTuning


@pytest.fixture(scope="module")
def square_pair():
    m = grid_square(10)
    return ManifoldPair(m, flatten(m))


def centre_goal(pair):
    uvh, _ = map_3d_to_task(pair, [0.5, 0.5, 0.0])
    return uvh[:2]


def test_start_at_goal_converges_immediately(square_pair):
    g = centre_goal(square_pair)
    t = integrate(square_pair, [0.5, 0.5, 0.0], g)
    assert t.converged and t.steps <= 1
    assert t.length() == pytest.approx(0.0, abs=1e-12)


def test_descent_onto_flat_square(square_pair):
    g = centre_goal(square_pair)
    t = integrate(square_pair, [0.5, 0.5, 1.0], g)
    assert t.status is Status.CONVERGED
    assert abs(t.task[-1, 2]) <= POS_TOL
    assert np.linalg.norm(t.velocity[-1]) <= REST_SPEED
    assert np.linalg.norm(t.position[-1] - t.goal_point) <= POS_TOL
    np.testing.assert_allclose(np.diff(t.t), DT, rtol=1e-9)
    assert np.all(np.isfinite(t.as_array()))


def test_follow_across_wavy_surface(pairs):
    p = pairs["sinusoid"]
    start = p.mesh3d.face_centroids[10] + 0.3 * p.normals[10]
    goal = p.mesh2d.face_centroids[500][:2]
    t = integrate(p, start, goal)
    assert t.converged
    # the path settles onto the surface: late samples sit close to h = 0
    assert np.abs(t.task[len(t) // 2:, 2]).max() < 0.05
    # damping: final kinetic energy respects the rest threshold
    assert 0.5 * np.dot(t.velocity[-1], t.velocity[-1]) <= 0.5 * REST_SPEED ** 2


def test_heun_step_matches_hand_update(square_pair):
    """First step of the integrator equals one explicit Heun update of the field."""
    from meshrmp.rmp.planner import Planner

    g = centre_goal(square_pair)
    x0, v0 = np.array([0.3, 0.6, 0.4]), np.array([0.05, 0.0, -0.1])
    t = integrate(square_pair, x0, g, start_velocity=v0, max_steps=1)
    pl = Planner(square_pair)
    prm = pl.params(g)
    a0 = pl.evaluate(x0, v0, prm).acceleration
    xp, vp = x0 + DT * v0, v0 + DT * a0
    a1 = pl.evaluate(xp, vp, prm).acceleration
    v1 = v0 + 0.5 * DT * (a0 + a1)
    x1 = x0 + 0.5 * DT * (v0 + v1)
    np.testing.assert_allclose(t.velocity[1], v1, atol=1e-12)
    np.testing.assert_allclose(t.position[1], x1, atol=1e-12)


def test_iteration_limit_and_default_cap(square_pair):
    g = centre_goal(square_pair)
    t = integrate(square_pair, [0.5, 0.5, 1.0], g, max_steps=5)
    assert t.status is Status.ITERATION_LIMIT and t.steps == 5
    assert default_max_steps(square_pair) == 18000


def test_left_domain(square_pair):
    t = integrate(square_pair, [5.0, 0.5, 0.0], centre_goal(square_pair))
    assert t.status is Status.LEFT_DOMAIN and not t.converged


def test_non_finite_state(square_pair):
    with pytest.raises(NonFiniteState) as info:
        integrate(square_pair, [0.5, 0.5, 1.0], (0.0, 0.0), perp=PolicyTuning(1e308, 0, 0))
    assert info.value.step is not None
    with pytest.raises(NonFiniteState):
        integrate(square_pair, [np.nan, 0.5, 0.5], (0.0, 0.0))


def test_bad_inputs(square_pair):
    with pytest.raises(GoalOutsideDisc):
        integrate(square_pair, [0.5, 0.5, 1.0], (1.0, 1.0))
    with pytest.raises(ValueError):
        integrate(square_pair, [0.5, 0.5, 1.0], (0.0, 0.0), dt=0.0)


def test_deterministic(pairs):
    p = pairs["hemisphere"]
    args = (p, p.mesh3d.face_centroids[3] + 0.2 * p.normals[3], (0.1, -0.2), FOLLOW_DEFAULT, PERP_DEFAULT)
    a, b = integrate(*args), integrate(*args)
    assert np.array_equal(a.as_array(), b.as_array())


def test_csv_output(square_pair, tmp_path):
    t = integrate(square_pair, [0.5, 0.5, 0.2], centre_goal(square_pair), max_steps=20)
    path = tmp_path / "traj.csv"
    t.to_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == len(t) + 1
    np.testing.assert_array_equal(np.array(rows[1:], dtype=float)[:, 1:4], t.position)


def test_offset_following(square_pair):
    g = centre_goal(square_pair)
    t = integrate(square_pair, [0.2, 0.2, 0.0], g, h_des=0.25)
    assert t.converged
    assert t.task[-1, 2] == pytest.approx(0.25, abs=POS_TOL)
