"""Riemannian motion policy algebra (reference implementation in numpy)."""

from dataclasses import dataclass

import numpy as np

from ..errors import GoalOutsideDisc

#: Eigenvalues of a metric at or below this are treated as zero.
PINV_TOL = 1e-10

A_PERP = np.diag([0.0, 0.0, 1.0])
A_FOLLOW = np.diag([1.0, 1.0, 0.0])


@dataclass(frozen=True)
class Policy:
    """Acceleration ``f`` with its Riemannian metric ``A``."""

    f: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, dtype=np.float64))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.float64))


@dataclass(frozen=True)
class PolicyTuning:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            val = float(getattr(self, name))
            if not val >= 0:
                raise ValueError(f"{name} must be non-negative, got {val}")
            object.__setattr__(self, name, val)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            value = [float(x) for x in value.split(",")]
        a, b, g = value
        return cls(a, b, g)

    def as_list(self):
        return [self.alpha, self.beta, self.gamma]


FOLLOW_DEFAULT = PolicyTuning(0.7, 13.6, 0.4)
PERP_DEFAULT = PolicyTuning(20.0, 30.0, 0.01)


@dataclass
class PlannerState:
    """Configuration-space state with its task-space mirror."""

    position: np.ndarray
    velocity: np.ndarray
    task_position: np.ndarray = None
    task_velocity: np.ndarray = None
    face: int = -1


def pinv_psd(A, tol=PINV_TOL):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix via its eigenbasis."""
    A = np.asarray(A, dtype=np.float64)
    w, Q = np.linalg.eigh(0.5 * (A + A.T))
    inv = np.zeros_like(w)
    keep = w > tol
    inv[keep] = 1.0 / w[keep]
    return (Q * inv) @ Q.T


def soft_normalize(z, gamma):
    """``z / (|z| + gamma * log(1 + exp(gamma * |z|)))``; zero at the origin."""
    z = np.asarray(z, dtype=np.float64)
    nz = float(np.linalg.norm(z))
    denom = nz + gamma * np.logaddexp(0.0, gamma * nz)
    if denom == 0.0:
        return np.zeros_like(z)
    return z / denom


def attractor_perp(state, h_des, tuning):
    """Task-frame policy pulling the normal offset ``h`` toward ``h_des``.

    The target keeps the current ``(u, v)``, so only the h error is nonzero;
    the metric ``diag(0, 0, 1)`` masks the remaining damping terms.
    """
    p, pd = _task(state)
    target = np.array([p[0], p[1], h_des])
    f = tuning.alpha * soft_normalize(target - p, tuning.gamma) - tuning.beta * pd
    return Policy(f, A_PERP.copy())


def surface_follow(state, goal, tuning):
    """Task-frame policy driving ``(u, v)`` to ``goal`` at the current ``h``."""
    p, pd = _task(state)
    goal = np.asarray(goal, dtype=np.float64)
    if np.hypot(goal[0], goal[1]) > 1.0 + 1e-9:
        raise GoalOutsideDisc(f"goal {goal.tolist()} lies outside the unit disc")
    target = np.array([goal[0], goal[1], p[2]])
    f = tuning.alpha * soft_normalize(target - p, tuning.gamma) - tuning.beta * pd
    return Policy(f, A_FOLLOW.copy())


def _task(state):
    if isinstance(state, PlannerState):
        return np.asarray(state.task_position, float), np.asarray(state.task_velocity, float)
    p, pd = state
    return np.asarray(p, float), np.asarray(pd, float)


def combine(policies):
    """Metric-weighted sum: ``((sum A)^+ sum(A f), sum A)``."""
    policies = list(policies)
    if not policies:
        raise ValueError("need at least one policy")
    A = sum(p.A for p in policies)
    rhs = sum(p.A @ p.f for p in policies)
    return Policy(pinv_psd(A) @ rhs, A)


def pullback(policy, J):
    """Pull a task-frame policy back through ``J``: ``((J'AJ)^+ J'Af, J'AJ)``."""
    J = np.asarray(J, dtype=np.float64)
    M = J.T @ policy.A @ J
    M = 0.5 * (M + M.T)
    return Policy(pinv_psd(M) @ (J.T @ policy.A @ policy.f), M)
