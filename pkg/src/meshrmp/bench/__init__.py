"""Synthetic scenes, trajectory metrics and the benchmark runner."""

from .harness import (
    WALL_TIME_COLUMNS,
    BenchConfig,
    BenchResult,
    SweepRun,
    TaskResult,
    doubling_alphas,
    load_bench_mesh,
    prepare,
    run_benchmark,
    sample_tasks,
    sweep_weighting,
)
from .metrics import (
    length_ratio,
    polyline_length,
    resample_polyline,
    sample_surface_point,
    segment_similarities,
    smoothness,
    surface_distance_profile,
)
from .scenarios import SCENARIOS, make_scenario

__all__ = [
    "BenchConfig",
    "BenchResult",
    "SCENARIOS",
    "SweepRun",
    "TaskResult",
    "WALL_TIME_COLUMNS",
    "doubling_alphas",
    "length_ratio",
    "load_bench_mesh",
    "make_scenario",
    "polyline_length",
    "prepare",
    "resample_polyline",
    "run_benchmark",
    "sample_surface_point",
    "sample_tasks",
    "segment_similarities",
    "smoothness",
    "surface_distance_profile",
    "sweep_weighting",
]
