"""Surface-approach and surface-following planner on a :class:`ManifoldPair`."""

import csv
import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import GoalOutsideDisc, NonFiniteState
from ..manifold import map_3d_to_task, map_task_to_3d
from ..mesh.spatial import locate_point_2d
from . import _kernels
from .policies import FOLLOW_DEFAULT, PERP_DEFAULT, PlannerState, PolicyTuning

#: Step of the fixed-rate integrator (100 Hz).
DT = 0.01
#: Converged requires the 3D goal within this distance (m) ...
POS_TOL = 0.005
#: ... and a speed at or below this (m/s).
REST_SPEED = 1e-3
#: Simulated-time cap on small scenes (s); larger scenes scale by diameter / 10 m.
TIME_CAP = 180.0


class Status(enum.Enum):
    CONVERGED = "Converged"
    ITERATION_LIMIT = "IterationLimit"
    LEFT_DOMAIN = "LeftDomain"


_STATUS = {
    _kernels.CONVERGED: Status.CONVERGED,
    _kernels.ITERATION_LIMIT: Status.ITERATION_LIMIT,
    _kernels.LEFT_DOMAIN: Status.LEFT_DOMAIN,
}

CSV_COLUMNS = ["t", "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az", "u", "v", "h", "face"]


@dataclass
class FieldEval:
    acceleration: np.ndarray
    metric: np.ndarray
    face: int
    task_position: np.ndarray
    lateral: float = 0.0


@dataclass
class Trajectory:
    """Fixed-rate samples of position, velocity and acceleration."""

    t: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    task: np.ndarray
    face: np.ndarray
    status: Status
    goal_uv: np.ndarray = None
    goal_point: np.ndarray = None
    dt: float = DT
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def steps(self):
        return len(self.t) - 1

    def length(self):
        """Polyline arc length (m)."""
        if len(self.position) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.position, axis=0), axis=1).sum())

    def as_array(self):
        return np.column_stack([self.t, self.position, self.velocity, self.acceleration,
                                self.task, self.face])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in self.as_array().tolist():
                w.writerow([repr(x) for x in row[:-1]] + [int(row[-1])])


def default_max_steps(pair, dt=DT):
    scale = max(1.0, pair.mesh3d.diameter / 10.0)
    return int(round(TIME_CAP * scale / dt))


class Planner:
    """Evaluates the combined acceleration field for one planning task.

    Keeps the last face id between calls so consecutive queries along a
    trajectory start from a nearby face; this cache is the only mutable state.
    """

    def __init__(self, pair, follow=FOLLOW_DEFAULT, perp=PERP_DEFAULT, h_des=0.0):
        self.pair = pair
        self.follow = PolicyTuning.parse(follow)
        self.perp = PolicyTuning.parse(perp)
        self.h_des = float(h_des)
        self._hint = -1
        self._a = np.empty(3)
        self._A = np.empty((3, 3))

    @cached_property
    def _arrays(self):
        return kernel_arrays(self.pair)

    def params(self, goal_uv):
        f, p = self.follow, self.perp
        return np.array([goal_uv[0], goal_uv[1], self.h_des, f.alpha, f.beta, f.gamma,
                         p.alpha, p.beta, p.gamma], dtype=np.float64)

    def evaluate(self, position, velocity, params):
        """Acceleration at ``(position, velocity)``; ``params`` from :meth:`params`."""
        x = np.asarray(position, dtype=np.float64)
        v = np.asarray(velocity, dtype=np.float64)
        f, u, w, h, lat = _kernels.field(*self._arrays, params, x, v, self._hint, self._a, self._A)
        self._hint = f
        return FieldEval(self._a.copy(), self._A.copy(), int(f), np.array([u, w, h]), lat)


def kernel_arrays(pair):
    cached = getattr(pair, "_kernel_arrays", None)
    if cached is None:
        cached = (*pair.index3d.kernel_args,
                  np.ascontiguousarray(pair.mesh2d.vertices),
                  pair.J_m_from_M, pair.normals, pair.boundary_opposite)
        pair._kernel_arrays = cached
    return cached


def sync_state(pair, position, velocity=(0.0, 0.0, 0.0)):
    """Planner state with task position ``(u, v, h)`` and task velocity filled in."""
    x = np.asarray(position, dtype=np.float64)
    v = np.asarray(velocity, dtype=np.float64)
    uvh, f = map_3d_to_task(pair, x)
    return PlannerState(x, v, uvh, pair.J_m_from_M[f] @ v, f)


def evaluate_field(pair, state, goal, follow=FOLLOW_DEFAULT, perp=PERP_DEFAULT, h_des=0.0):
    """Configuration-frame acceleration of the combined surface policies.

    Both task-frame policies are built at ``state``, pulled back through the
    Jacobian of the closest face and combined there. Returns a
    :class:`FieldEval` carrying the combined metric for diagnostics.
    """
    planner = Planner(pair, follow, perp, h_des)
    pos = state.position if isinstance(state, PlannerState) else state[0]
    vel = state.velocity if isinstance(state, PlannerState) else state[1]
    return planner.evaluate(pos, vel, planner.params(goal))


def resolve_goal(pair, goal_uv, h_des=0.0):
    """Check a planar goal and return its 3D point (offset by ``h_des``)."""
    g = np.asarray(goal_uv, dtype=np.float64)[:2]
    if np.hypot(g[0], g[1]) > 1.0 + 1e-9:
        raise GoalOutsideDisc(f"goal {g.tolist()} lies outside the unit disc")
    _, outside = locate_point_2d(pair.index2d, g)
    if outside:
        raise GoalOutsideDisc(f"goal {g.tolist()} lies outside the flattened mesh")
    p, _, _ = map_task_to_3d(pair, (g[0], g[1], h_des))
    return g, p


def integrate(pair, start, goal_uv, follow=FOLLOW_DEFAULT, perp=PERP_DEFAULT, dt=DT,
              max_steps=None, h_des=0.0, start_velocity=(0.0, 0.0, 0.0), pos_tol=POS_TOL,
              rest_speed=REST_SPEED, outside_margin=None):
    """Integrate the acceleration field from ``start`` until the goal is reached at rest.

    Uses one Heun predictor-corrector pass per step:
    ``v' = v + (a + a*) dt / 2`` and ``x' = x + (v + v') dt / 2`` where ``a*``
    is evaluated at the explicit Euler prediction.

    Raises
    ------
    NonFiniteState
        If the state stops being finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    g, goal3d = resolve_goal(pair, goal_uv, h_des)
    if max_steps is None:
        max_steps = default_max_steps(pair, dt)
    if outside_margin is None:
        outside_margin = 0.05 * pair.mesh3d.diameter
    planner = Planner(pair, follow, perp, h_des)
    n = int(max_steps) + 1
    T = np.empty(n)
    X, V, A, U = np.empty((n, 3)), np.empty((n, 3)), np.empty((n, 3)), np.empty((n, 3))
    FACE = np.empty(n, dtype=np.int64)
    m, code = _kernels.integrate(*planner._arrays, planner.params(g),
                                 np.asarray(start, dtype=np.float64),
                                 np.asarray(start_velocity, dtype=np.float64),
                                 goal3d, float(dt), int(max_steps), float(pos_tol),
                                 float(rest_speed), float(outside_margin), T, X, V, A, U, FACE)
    if code == _kernels.NON_FINITE:
        last = m - 1
        raise NonFiniteState(f"state became non-finite at step {last}", step=last,
                             position=X[last].copy(), velocity=V[last].copy())
    return Trajectory(T[:m].copy(), X[:m].copy(), V[:m].copy(), A[:m].copy(), U[:m].copy(),
                      FACE[:m].copy(), _STATUS[code], goal_uv=g, goal_point=goal3d, dt=dt,
                      meta={"follow": planner.follow.as_list(), "perp": planner.perp.as_list(),
                            "h_des": h_des})
