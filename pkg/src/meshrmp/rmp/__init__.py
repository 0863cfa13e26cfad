"""Riemannian motion policies on mesh manifolds and trajectory integration."""

from .planner import (
    CSV_COLUMNS,
    DT,
    POS_TOL,
    REST_SPEED,
    FieldEval,
    Planner,
    Status,
    Trajectory,
    default_max_steps,
    evaluate_field,
    integrate,
    resolve_goal,
    sync_state,
)
from .policies import (
    A_FOLLOW,
    A_PERP,
    FOLLOW_DEFAULT,
    PERP_DEFAULT,
    PINV_TOL,
    PlannerState,
    Policy,
    PolicyTuning,
    attractor_perp,
    combine,
    pinv_psd,
    pullback,
    soft_normalize,
    surface_follow,
)

__all__ = [
    "A_FOLLOW", "A_PERP", "CSV_COLUMNS", "DT", "FOLLOW_DEFAULT", "PERP_DEFAULT", "PINV_TOL",
    "POS_TOL", "REST_SPEED", "FieldEval", "Planner", "PlannerState", "Policy", "PolicyTuning",
    "Status", "Trajectory", "attractor_perp", "combine", "default_max_steps", "evaluate_field",
    "integrate", "pinv_psd", "pullback", "resolve_goal", "soft_normalize", "surface_follow",
    "sync_state",
]
