"""Axis-aligned bounding-box tree over mesh faces."""

import numpy as np

from ..errors import EmptyMesh
from . import _kernels
from .trimesh import SurfacePoint

#: A 2D query farther than this (in disc units) from every face is outside.
OUTSIDE_TOL = 1e-12


class SpatialIndex:
    """AABB tree over the faces of a 2D or 3D :class:`TriMesh`.

    Planar meshes are indexed as if embedded at z = 0, so one closest-point
    kernel serves both closest-face queries in 3D and point location in 2D.
    The tree is immutable once built.
    """

    def __init__(self, mesh, leaf_size=4):
        self.mesh = mesh
        self.V = np.ascontiguousarray(mesh.vertices3)
        self.F = np.ascontiguousarray(mesh.faces)
        if mesh.n_faces:
            self.adj = np.ascontiguousarray(mesh.face_adjacency)
            tri = self.V[self.F]
            lo, hi = tri.min(axis=1), tri.max(axis=1)
            self.nodes = _kernels.build_bvh(lo, hi, tri.mean(axis=1), leaf_size)
        else:
            self.adj = np.zeros((0, 3), dtype=np.int64)
            self.nodes = None
        self.tie_warnings = 0

    @property
    def dimension(self):
        return self.mesh.dimension

    def __len__(self):
        return self.mesh.n_faces

    @property
    def kernel_args(self):
        """Tree and mesh arrays in the order the compiled kernels expect."""
        return (*self.nodes, self.V, self.F, self.adj)

    def leaves(self):
        """Face indices stored in each leaf."""
        lo, hi, left, right, start, count, order = self.nodes
        return [order[s:s + c].tolist() for s, c, l in zip(start, count, left) if l < 0]

    def query(self, point, hint=-1):
        """Return ``(face, bary, distance)`` of the closest face to ``point``."""
        if self.nodes is None:
            raise EmptyMesh("spatial index holds no faces")
        p = np.asarray(point, dtype=np.float64)
        if p.shape[0] == 2:
            p = np.array([p[0], p[1], 0.0])
        f, b1, b2, b3, d, tie = _kernels.query_closest(*self.kernel_args, p[0], p[1], p[2], int(hint))
        if tie:
            # medial-axis query; counter only, result stays deterministic
            self.tie_warnings += 1
        return int(f), np.array([b1, b2, b3]), float(d)

    def query_many(self, points):
        if self.nodes is None:
            raise EmptyMesh("spatial index holds no faces")
        P = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if P.shape[1] == 2:
            P = np.column_stack([P, np.zeros(len(P))])
        return _kernels.query_many(*self.kernel_args, P)


def closest_point_on_mesh(index, point, hint=-1):
    """Closest on-surface location to a 3D point.

    Returns ``(SurfacePoint, distance)``; ``offset_h`` is the distance signed by
    the side of the face normal the query lies on.
    """
    f, bary, d = index.query(point, hint)
    mesh = index.mesh
    p = np.asarray(point, dtype=np.float64)
    q = bary @ mesh.vertices3[mesh.faces[f]]
    side = float(np.dot(p - q, mesh.face_normals[f]))
    h = d if side >= 0 else -d
    return SurfacePoint(f, tuple(bary), h), d


def locate_point_2d(index, point):
    """Face containing a planar point, or the closest face if it lies outside.

    Returns ``(SurfacePoint, outside)``. Points on shared edges or vertices
    resolve to the lowest face index; outside points get clamped weights.
    """
    f, bary, d = index.query(point)
    return SurfacePoint(f, tuple(bary)), bool(d > OUTSIDE_TOL)
