"""Trajectory quality metrics: smoothness, surface distance, length ratio."""

import numpy as np

from ..errors import DegenerateTrajectory, ZeroGeodesic
from ..mesh.spatial import SpatialIndex
from ..mesh.trimesh import SurfacePoint

#: Segments at or below this length (m) carry no direction and are skipped.
MIN_SEGMENT = 1e-12
#: Arc-length spacing (m) of the surface-distance resampling.
RESAMPLE_STEP = 0.01


def _positions(traj):
    return np.asarray(getattr(traj, "position", traj), dtype=np.float64)


def polyline_length(points):
    p = np.asarray(points, dtype=np.float64)
    if len(p) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())


def sample_surface_point(mesh, rng):
    """Area-uniform random point on ``mesh``.

    The face is drawn with probability proportional to its area; inside the
    face, ``(1 - sqrt(r1), sqrt(r1) (1 - r2), sqrt(r1) r2)`` is uniform.
    """
    areas = mesh.face_areas
    cdf = np.cumsum(areas)
    face = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    face = min(face, mesh.n_faces - 1)
    r1, r2 = rng.random(), rng.random()
    s = np.sqrt(r1)
    b = (1.0 - s, s * (1.0 - r2), s * r2)
    # renormalise so rounding never trips the sum-to-one check
    t = sum(b)
    return SurfacePoint(face, (b[0] / t, b[1] / t, b[2] / t))


def segment_similarities(points):
    """Angular similarity ``1 - angle / pi`` of every consecutive segment pair."""
    seg = np.diff(_positions(points), axis=0)
    n = np.linalg.norm(seg, axis=1)
    seg = seg[n > MIN_SEGMENT]
    n = n[n > MIN_SEGMENT]
    if len(seg) < 2:
        raise DegenerateTrajectory("need at least two segments with positive length")
    c = np.einsum("ij,ij->i", seg[:-1], seg[1:]) / (n[:-1] * n[1:])
    return 1.0 - np.arccos(np.clip(c, -1.0, 1.0)) / np.pi


def smoothness(traj):
    """Mean angular similarity over the trajectory; 1 for a straight line."""
    return float(segment_similarities(traj).mean())


def resample_polyline(points, step=RESAMPLE_STEP):
    """Points at arc length ``0, step, 2 step, ...``; ``floor(L / step) + 1`` of them."""
    p = _positions(points)
    if len(p) == 1:
        return p.copy()
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(p, axis=0), axis=1))])
    q = np.arange(int(np.floor(s[-1] / step)) + 1) * step
    return np.column_stack([np.interp(q, s, p[:, c]) for c in range(3)])


def surface_distance_profile(traj, pair_or_index, step=RESAMPLE_STEP):
    """Distance (mm) from the mesh at every ``step`` of arc length.

    ``pair_or_index`` is a :class:`ManifoldPair`, a :class:`SpatialIndex` or a
    3D mesh. Returns ``{"mean": ..., "max": ..., "samples": array}``.
    """
    index = getattr(pair_or_index, "index3d", pair_or_index)
    if not isinstance(index, SpatialIndex):
        index = SpatialIndex(index)
    p = _positions(traj)
    if len(p) == 0:
        raise ValueError("empty trajectory")
    q = resample_polyline(p, step)
    _, _, d = index.query_many(q)
    mm = 1000.0 * d
    return {"mean": float(mm.mean()), "max": float(mm.max()), "samples": mm}


def length_ratio(traj, geodesic_length):
    """Trajectory arc length over the reference geodesic length."""
    if not geodesic_length > 0.0:
        raise ZeroGeodesic("geodesic length must be positive")
    return polyline_length(_positions(traj)) / geodesic_length
