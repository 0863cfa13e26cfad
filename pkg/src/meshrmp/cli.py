"""Command-line entry point: ``meshrmp <command> ...``.

Mesh arguments take a file path (``.off`` / ``.obj``) or ``scenario:<name>``
for one of the built-in synthetic scenes.
"""

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .bench.harness import BenchConfig, doubling_alphas, load_bench_mesh, run_benchmark, sweep_weighting
from .bench.scenarios import SCENARIOS, make_scenario
from .errors import MeshRMPError
from .geodesic import DEFAULT_K, build_geodesic_graph, shortest_surface_path
from .manifold import ManifoldPair, map_3d_to_task
from .mesh.geometry import mesh_stats
from .mesh.io import load_mesh, save_off
from .mesh.trimesh import SurfacePoint, TriMesh
from .parametrization import flatten, validate_parametrization
from .rmp.planner import DT, integrate
from .rmp.policies import FOLLOW_DEFAULT, PERP_DEFAULT, PolicyTuning


def _floats(text, n=None):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _vec(n):
    return lambda text: _floats(text, n)


def _tuning(text):
    name, sep, rest = text.partition("=")
    if not sep or name not in ("follow", "perp"):
        raise argparse.ArgumentTypeError("tuning must look like follow=a,b,g or perp=a,b,g")
    try:
        return name, PolicyTuning.parse(_floats(rest, 3))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dump(obj):
    print(json.dumps(obj, indent=2))


def _pair(mesh_arg, flat_arg=None, scheme="meanvalue"):
    mesh = load_bench_mesh(mesh_arg)
    if flat_arg:
        m2 = load_mesh(flat_arg, validate=False)
        flat = TriMesh(m2.vertices[:, :2], m2.faces, validate=False)
    else:
        flat = flatten(mesh, scheme)
    return ManifoldPair(mesh, flat)


def cmd_flatten(args):
    mesh = load_bench_mesh(args.mesh)
    flat = flatten(mesh, args.scheme, boundary_shape=args.boundary, check=False)
    report = validate_parametrization(mesh, flat).as_dict()
    report["iterations"] = flat.iterations
    if args.out:
        save_off(args.out, flat)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2)
    _dump(report)
    return 0 if report["foldovers"] == 0 else 1


def cmd_map(args):
    pair = _pair(args.mesh, args.flat, args.scheme)
    uvh, face = map_3d_to_task(pair, np.array(args.point))
    R = pair.orientations[face]
    _dump({"uvh": uvh.tolist(), "face": int(face), "R": R.ravel().tolist()})
    return 0


def cmd_plan(args):
    if (args.goal_uv is None) == (args.goal_3d is None):
        raise SystemExit("plan: give exactly one of --goal-uv or --goal-3d")
    pair = _pair(args.mesh, args.flat, args.scheme)
    tunings = {"follow": FOLLOW_DEFAULT, "perp": PERP_DEFAULT}
    tunings.update(dict(args.tuning or []))
    if args.goal_3d is not None:
        uvh, _ = map_3d_to_task(pair, np.array(args.goal_3d))
        goal_uv = uvh[:2]
    else:
        goal_uv = np.array(args.goal_uv)
    traj = integrate(pair, np.array(args.start), goal_uv, tunings["follow"], tunings["perp"],
                     dt=args.dt, max_steps=args.max_steps, h_des=args.h_des)
    if args.out:
        traj.to_csv(args.out)
    _dump({
        "status": traj.status.value,
        "steps": traj.steps,
        "time_s": float(traj.t[-1]),
        "length_m": traj.length(),
        "goal_uv": [float(x) for x in traj.goal_uv],
        "goal_point": traj.goal_point.tolist(),
        "final_position": traj.position[-1].tolist(),
        "final_error_m": float(np.linalg.norm(traj.position[-1] - traj.goal_point)),
    })
    return 0 if traj.converged else 2


def cmd_geodesic(args):
    mesh = load_bench_mesh(args.mesh)
    graph = build_geodesic_graph(mesh, args.k)
    start = SurfacePoint(args.start_face, tuple(args.start_bary))
    goal = SurfacePoint(args.goal_face, tuple(args.goal_bary))
    for sp in (start, goal):
        if not 0 <= sp.face < mesh.n_faces:
            raise SystemExit(f"geodesic: face {sp.face} out of range")
    poly, length = shortest_surface_path(graph, mesh, start, goal)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "z"])
            w.writerows([[repr(float(c)) for c in p] for p in poly])
    _dump({"length_m": length, "points": len(poly), "k": args.k})
    return 0


def _load_config(args):
    cfg = BenchConfig.from_json(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tasks is not None:
        cfg.tasks = args.tasks
    return cfg


def cmd_bench(args):
    cfg = _load_config(args)
    if args.trajectories:
        cfg.write_trajectories = True
    bench = run_benchmark(cfg)
    s = dict(bench.summary)
    s.pop("config")
    _dump(s)
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    alphas = args.alphas if args.alphas else doubling_alphas()
    runs = sweep_weighting(cfg, alphas, policy=args.policy, offset=args.offset)
    _dump([{"alpha": r.alpha, "status": r.status, "steps": r.steps,
            "surface_mean_mm": r.surface_mean_mm, "surface_max_mm": r.surface_max_mm}
           for r in runs])
    return 0


def cmd_stats(args):
    _dump(mesh_stats(load_bench_mesh(args.mesh)).as_dict())
    return 0


def cmd_scenario(args):
    mesh = make_scenario(args.name)
    save_off(args.out, mesh)
    _dump(mesh_stats(mesh).as_dict())
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="meshrmp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("flatten", help="flatten a disc mesh and report distortion")
    s.add_argument("mesh")
    s.add_argument("--scheme", choices=["tutte", "meanvalue"], default="meanvalue")
    s.add_argument("--boundary", choices=["circle", "square"], default="circle",
                   help="boundary shape; 'square' is experimental")
    s.add_argument("--out", help="write the flat mesh as OFF (z = 0)")
    s.add_argument("--report", help="write the distortion report as JSON")
    s.set_defaults(func=cmd_flatten)

    def pair_args(s):
        s.add_argument("mesh")
        s.add_argument("--flat", help="precomputed flat mesh (OFF/OBJ); flattened on the fly otherwise")
        s.add_argument("--scheme", choices=["tutte", "meanvalue"], default="meanvalue")

    s = sub.add_parser("map", help="task coordinates and orientation of a 3D point")
    pair_args(s)
    s.add_argument("--point", type=_vec(3), required=True, metavar="X,Y,Z")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("plan", help="integrate one trajectory")
    pair_args(s)
    s.add_argument("--start", type=_vec(3), required=True, metavar="X,Y,Z")
    s.add_argument("--goal-uv", type=_vec(2), metavar="U,V")
    s.add_argument("--goal-3d", type=_vec(3), metavar="X,Y,Z")
    s.add_argument("--tuning", type=_tuning, action="append", metavar="NAME=A,B,G",
                   help="follow=... or perp=...; may repeat")
    s.add_argument("--dt", type=float, default=DT)
    s.add_argument("--max-steps", type=int)
    s.add_argument("--h-des", type=float, default=0.0, help="desired surface offset (m)")
    s.add_argument("--out", help="trajectory CSV")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("geodesic", help="graph geodesic between two surface points")
    s.add_argument("mesh")
    s.add_argument("--start-face", type=int, required=True)
    s.add_argument("--start-bary", type=_vec(3), required=True, metavar="B1,B2,B3")
    s.add_argument("--goal-face", type=int, required=True)
    s.add_argument("--goal-bary", type=_vec(3), required=True, metavar="B1,B2,B3")
    s.add_argument("-k", type=int, default=DEFAULT_K, help="Steiner points per edge")
    s.add_argument("--out", help="path CSV (x, y, z)")
    s.set_defaults(func=cmd_geodesic)

    for name, func, text in (("bench", cmd_bench, "run a benchmark config"),
                             ("sweep", cmd_sweep, "sweep one policy's alpha on a single task")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--out-dir")
        s.add_argument("--seed", type=int)
        s.add_argument("--tasks", type=int)
        s.set_defaults(func=func)
        if name == "bench":
            s.add_argument("--trajectories", action="store_true", help="also write traj_<id>.csv")
        else:
            s.add_argument("--alphas", type=_floats, metavar="A1,A2,...",
                           help="default doubles from 0.1 to 25.6")
            s.add_argument("--policy", choices=["perp", "follow"], default="perp")
            s.add_argument("--offset", type=float, default=2.0,
                           help="start height above the sampled surface point (m)")

    s = sub.add_parser("stats", help="face count, extent and area of a mesh")
    s.add_argument("mesh")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("scenario", help="write a synthetic scenario mesh to OFF")
    s.add_argument("name", choices=sorted(SCENARIOS))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scenario)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MeshRMPError, OSError) as exc:
        print(f"meshrmp {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
