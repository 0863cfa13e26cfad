"""Random planning tasks, metric collection and result export."""

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..errors import DegenerateTrajectory, MeshRMPError, ZeroGeodesic
from ..geodesic import DEFAULT_K, build_geodesic_graph, shortest_surface_paths
from ..manifold import ManifoldPair
from ..mesh.geometry import mesh_stats
from ..mesh.io import load_mesh
from ..mesh.trimesh import SurfacePoint
from ..parametrization import WeightScheme, flatten
from ..rmp.planner import DT, Planner, integrate, kernel_arrays
from ..rmp.policies import FOLLOW_DEFAULT, PERP_DEFAULT, PolicyTuning
from .metrics import length_ratio, sample_surface_point, smoothness, surface_distance_profile
from .scenarios import SCENARIO_PREFIX, make_scenario

log = logging.getLogger(__name__)

#: Start and goal must be at least this fraction of the mesh diameter apart.
MIN_SEPARATION = 0.05
#: Field evaluations re-timed per task for the per-iteration statistics.
TIMING_SAMPLES = 200
#: Simulated-time cap (s) for weighting sweeps; slow gains need long runs.
SWEEP_TIME_CAP = 3000.0

WALL_TIME_COLUMNS = ("plan_seconds", "iter_median_us", "iter_p99_us")


@dataclass
class BenchConfig:
    """Benchmark inputs; mirrors the JSON config keys."""

    mesh: str
    tasks: object = 100
    seed: int = 0
    tuning_follow: list = field(default_factory=FOLLOW_DEFAULT.as_list)
    tuning_perp: list = field(default_factory=PERP_DEFAULT.as_list)
    dt: float = DT
    max_steps: int = None
    steiner_k: int = DEFAULT_K
    out_dir: str = None
    scheme: str = "meanvalue"
    write_trajectories: bool = False
    min_separation: float = MIN_SEPARATION
    workers: int = 1

    def __post_init__(self):
        n = self.tasks if isinstance(self.tasks, int) else len(self.tasks)
        if n < 1:
            raise ValueError("task count must be at least 1")
        self.tuning_follow = PolicyTuning.parse(self.tuning_follow).as_list()
        self.tuning_perp = PolicyTuning.parse(self.tuning_perp).as_list()

    @property
    def n_tasks(self):
        return self.tasks if isinstance(self.tasks, int) else len(self.tasks)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            cfg = cls.from_dict(json.load(fh))
        # a relative mesh path is taken relative to the config file
        if not cfg.mesh.startswith(SCENARIO_PREFIX) and not os.path.isabs(cfg.mesh):
            cfg.mesh = os.path.join(os.path.dirname(os.path.abspath(path)), cfg.mesh)
        return cfg

    def to_dict(self):
        return asdict(self)


@dataclass
class TaskResult:
    task_id: int
    start: SurfacePoint
    goal: SurfacePoint
    status: str
    steps: int = 0
    plan_seconds: float = math.nan
    iter_median_us: float = math.nan
    iter_p99_us: float = math.nan
    path_length: float = math.nan
    geodesic_length: float = math.nan
    length_ratio: float = math.nan
    smoothness: float = math.nan
    surface_mean_mm: float = math.nan
    surface_max_mm: float = math.nan
    flags: str = ""
    error: str = ""

    @property
    def converged(self):
        return self.status == "Converged"

    def row(self):
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, SurfacePoint):
                d[f"{f.name}_face"] = v.face
                d[f"{f.name}_bary"] = " ".join(repr(float(b)) for b in v.bary)
            else:
                d[f.name] = v
        return d


@dataclass
class BenchResult:
    results: list
    summary: dict
    pair: ManifoldPair = None
    trajectories: dict = field(default_factory=dict)


def load_bench_mesh(spec):
    """Mesh from a file path or a ``scenario:<name>`` generator reference."""
    if spec.startswith(SCENARIO_PREFIX):
        return make_scenario(spec)
    return load_mesh(spec)


def prepare(mesh, scheme="meanvalue"):
    """Flatten ``mesh`` and build the search trees; returns ``(pair, seconds)``."""
    t0 = time.perf_counter()
    flat = flatten(mesh, WeightScheme.parse(scheme))
    pair = ManifoldPair(mesh, flat)
    kernel_arrays(pair)
    return pair, time.perf_counter() - t0


def sample_tasks(mesh, n, rng, min_separation=MIN_SEPARATION, max_tries=1000):
    """``n`` start/goal pairs whose chord is at least ``min_separation * diameter``.

    The chord bounds the geodesic from below, so the rule also guarantees the
    geodesic separation.
    """
    v = mesh.vertices3
    sep = min_separation * mesh.diameter
    out = []
    for _ in range(n):
        a = sample_surface_point(mesh, rng)
        pa = np.asarray(a.bary) @ v[mesh.faces[a.face]]
        for _ in range(max_tries):
            b = sample_surface_point(mesh, rng)
            pb = np.asarray(b.bary) @ v[mesh.faces[b.face]]
            if np.linalg.norm(pb - pa) >= sep:
                break
        else:
            raise ValueError("could not sample a goal far enough from the start")
        out.append((a, b))
    return out


def _parse_task(t):
    def sp(d):
        return SurfacePoint(int(d["face"]), tuple(float(x) for x in d["bary"]))
    return sp(t["start"]), sp(t["goal"])


def time_field(planner, goal_uv, trajectory, n=TIMING_SAMPLES):
    """Wall time (µs) of single field evaluations at states along ``trajectory``."""
    m = len(trajectory.t)
    idx = np.unique(np.linspace(0, m - 1, min(n, m)).astype(int))
    params = planner.params(goal_uv)
    out = np.empty(len(idx))
    for j, i in enumerate(idx):
        x, v = trajectory.position[i], trajectory.velocity[i]
        t0 = time.perf_counter_ns()
        planner.evaluate(x, v, params)
        out[j] = (time.perf_counter_ns() - t0) / 1000.0
    return out


def run_task(pair, task_id, start, goal, geodesic, config):
    """Plan one task and evaluate every metric; errors land in ``status``."""
    res = TaskResult(task_id, start, goal, status="Pending")
    flags = []
    try:
        x0 = pair.surface_point_3d(start)
        goal_uv = pair.surface_point_2d(goal)
        t0 = time.perf_counter()
        traj = integrate(pair, x0, goal_uv, config.tuning_follow, config.tuning_perp,
                         dt=config.dt, max_steps=config.max_steps)
        res.plan_seconds = time.perf_counter() - t0
        res.status = traj.status.value
        res.steps = traj.steps
        planner = Planner(pair, config.tuning_follow, config.tuning_perp)
        it = time_field(planner, goal_uv, traj)
        res.iter_median_us = float(np.median(it))
        res.iter_p99_us = float(np.percentile(it, 99))
        res.path_length = traj.length()
        if geodesic is not None:
            res.geodesic_length = geodesic[1]
            try:
                res.length_ratio = length_ratio(traj, geodesic[1])
            except ZeroGeodesic:
                res.length_ratio = 1.0
                flags.append("zero_geodesic")
        try:
            res.smoothness = smoothness(traj)
        except DegenerateTrajectory:
            flags.append("degenerate_trajectory")
        prof = surface_distance_profile(traj, pair)
        res.surface_mean_mm, res.surface_max_mm = prof["mean"], prof["max"]
    except MeshRMPError as exc:
        res.status = type(exc).__name__
        res.error = str(exc)
        traj = None
    res.flags = ";".join(flags)
    return res, traj


def _summary_stats(x):
    x = np.asarray([v for v in x if np.isfinite(v)], dtype=float)
    if x.size == 0:
        return None
    return {"median": float(np.median(x)), "mean": float(x.mean()), "min": float(x.min()),
            "max": float(x.max()), "p99": float(np.percentile(x, 99))}


def run_benchmark(config, mesh=None, pair=None, keep_trajectories=False):
    """Run every task of ``config`` and write results when ``out_dir`` is set.

    ``mesh`` and ``pair`` may be passed to reuse an already loaded scene.
    Returns a :class:`BenchResult`.
    """
    if isinstance(config, dict):
        config = BenchConfig.from_dict(config)
    if mesh is None:
        mesh = pair.mesh3d if pair is not None else load_bench_mesh(config.mesh)
    setup_seconds = 0.0
    if pair is None:
        pair, setup_seconds = prepare(mesh, config.scheme)
    rng = np.random.default_rng(config.seed)
    if isinstance(config.tasks, int):
        tasks = sample_tasks(mesh, config.tasks, rng, config.min_separation)
    else:
        tasks = [_parse_task(t) for t in config.tasks]

    t0 = time.perf_counter()
    graph = build_geodesic_graph(mesh, config.steiner_k)
    geo_setup = time.perf_counter() - t0
    t0 = time.perf_counter()
    geodesics = _safe_geodesics(graph, mesh, tasks)
    geo_seconds = time.perf_counter() - t0

    def job(i):
        return run_task(pair, i, tasks[i][0], tasks[i][1], geodesics[i], config)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as ex:
            out = list(ex.map(job, range(len(tasks))))
    else:
        out = [job(i) for i in range(len(tasks))]
    results = [r for r, _ in out]
    trajs = {r.task_id: t for r, t in out if t is not None}

    summary = summarize(results, config, mesh)
    summary["timing"]["setup_seconds"] = setup_seconds
    summary["timing"]["geodesic_setup_seconds"] = geo_setup
    summary["timing"]["geodesic_query_seconds"] = geo_seconds
    bench = BenchResult(results, summary, pair, trajs if keep_trajectories or config.write_trajectories else {})
    if config.out_dir:
        write_results(bench, config)
    return bench


def _safe_geodesics(graph, mesh, tasks):
    try:
        return shortest_surface_paths(graph, mesh, tasks)
    except MeshRMPError as exc:
        log.warning("geodesic batch failed (%s); retrying per task", exc)
    out = []
    for t in tasks:
        try:
            out.append(shortest_surface_paths(graph, mesh, [t])[0])
        except MeshRMPError:
            out.append(None)
    return out


def summarize(results, config, mesh):
    conv = [r for r in results if r.converged]
    statuses = {}
    for r in results:
        statuses[r.status] = statuses.get(r.status, 0) + 1
    return {
        "n_tasks": len(results),
        "n_converged": len(conv),
        "success_rate": len(conv) / len(results),
        "status_counts": dict(sorted(statuses.items())),
        "length_ratio": _summary_stats(r.length_ratio for r in conv),
        "smoothness": _summary_stats(r.smoothness for r in conv),
        "surface_mean_mm": _summary_stats(r.surface_mean_mm for r in conv),
        "surface_max_mm": _summary_stats(r.surface_max_mm for r in conv),
        "path_length_m": _summary_stats(r.path_length for r in conv),
        "steps": _summary_stats(r.steps for r in conv),
        "timing": {
            "iter_median_us": _summary_stats(r.iter_median_us for r in results),
            "iter_p99_us": _summary_stats(r.iter_p99_us for r in results),
            "plan_seconds": _summary_stats(r.plan_seconds for r in results),
        },
        "mesh": mesh_stats(mesh).as_dict(),
        "seed": config.seed,
        "min_separation_rule": f"chord >= {config.min_separation} * diameter",
        "config": config.to_dict(),
    }


def write_results(bench, config):
    os.makedirs(config.out_dir, exist_ok=True)
    rows = [r.row() for r in bench.results]
    with open(os.path.join(config.out_dir, "results.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    with open(os.path.join(config.out_dir, "summary.json"), "w") as fh:
        json.dump(bench.summary, fh, indent=2, default=_json_default)
    if config.write_trajectories:
        for tid, traj in bench.trajectories.items():
            traj.to_csv(os.path.join(config.out_dir, f"traj_{tid}.csv"))


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


@dataclass
class SweepRun:
    alpha: float
    status: str
    steps: int
    surface_mean_mm: float
    surface_max_mm: float
    path_length: float
    trajectory: object = None


def sweep_weighting(config, alphas, policy="perp", start=None, goal_uv=None, offset=2.0,
                    mesh=None, pair=None, time_cap=SWEEP_TIME_CAP):
    """Re-plan one task for each ``alpha`` of ``policy`` ("perp" or "follow").

    Without an explicit ``start`` (3D) and ``goal_uv``, one task is sampled
    from the config seed and the start is lifted ``offset`` metres along the
    surface normal. The other policy keeps its configured tuning. Returns a
    list of :class:`SweepRun` in the order of ``alphas``.
    """
    if isinstance(config, dict):
        config = BenchConfig.from_dict(config)
    if policy not in ("perp", "follow"):
        raise ValueError("policy must be 'perp' or 'follow'")
    if mesh is None:
        mesh = pair.mesh3d if pair is not None else load_bench_mesh(config.mesh)
    if pair is None:
        pair, _ = prepare(mesh, config.scheme)
    if start is None or goal_uv is None:
        rng = np.random.default_rng(config.seed)
        a, b = sample_tasks(mesh, 1, rng, config.min_separation)[0]
        if start is None:
            start = pair.surface_point_3d(a) + offset * pair.normals[a.face]
        if goal_uv is None:
            goal_uv = pair.surface_point_2d(b)
    max_steps = config.max_steps
    if max_steps is None:
        max_steps = int(round(time_cap / config.dt))
    runs = []
    for alpha in alphas:
        follow = PolicyTuning.parse(config.tuning_follow)
        perp = PolicyTuning.parse(config.tuning_perp)
        if policy == "perp":
            perp = PolicyTuning(alpha, perp.beta, perp.gamma)
        else:
            follow = PolicyTuning(alpha, follow.beta, follow.gamma)
        try:
            traj = integrate(pair, start, goal_uv, follow, perp, dt=config.dt, max_steps=max_steps)
        except MeshRMPError as exc:
            runs.append(SweepRun(float(alpha), type(exc).__name__, 0, math.nan, math.nan, math.nan))
            continue
        prof = surface_distance_profile(traj, pair)
        runs.append(SweepRun(float(alpha), traj.status.value, traj.steps, prof["mean"],
                             prof["max"], traj.length(), traj))
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "sweep.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "policy", "status", "steps", "surface_mean_mm", "surface_max_mm",
                        "path_length"])
            for r in runs:
                w.writerow([repr(r.alpha), policy, r.status, r.steps, repr(r.surface_mean_mm),
                            repr(r.surface_max_mm), repr(r.path_length)])
        for i, r in enumerate(runs):
            if r.trajectory is not None:
                r.trajectory.to_csv(os.path.join(config.out_dir, f"sweep_{i}_alpha_{r.alpha:g}.csv"))
    return runs


def doubling_alphas(lo=0.1, hi=25.6):
    """``lo, 2 lo, 4 lo, ...`` up to ``hi`` inclusive."""
    out = [lo]
    while out[-1] * 2 <= hi * (1 + 1e-12):
        out.append(out[-1] * 2)
    return out
