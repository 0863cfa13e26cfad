"""Correspondence between a 3D disc mesh and its flattening.

The task map sends a 3D point to ``(u, v, h)``: the planar coordinates of its
closest surface point plus the signed distance along the face normal.
"""

from functools import cached_property

import numpy as np

from .errors import DegenerateTriangle, MismatchedMeshes
from .mesh.spatial import SpatialIndex, closest_point_on_mesh, locate_point_2d


class ManifoldPair:
    """3D mesh, flat mesh, their AABB trees and per-face Jacobians.

    Attributes
    ----------
    J_M_from_m : ndarray, shape (M, 3, 3)
        ``[B | n]`` per face, with ``B`` the linear part of the planar-to-3D
        affine map and ``n`` the unit face normal.
    J_m_from_M : ndarray, shape (M, 3, 3)
        Inverse of ``J_M_from_m``; maps 3D velocities to task velocities.
    """

    def __init__(self, mesh3d, mesh2d, index3d=None, index2d=None):
        if mesh3d.dimension != 3:
            raise ValueError("first mesh must be 3D")
        if mesh2d.dimension != 2:
            raise ValueError("second mesh must be planar")
        if mesh3d.faces.shape != mesh2d.faces.shape or not np.array_equal(mesh3d.faces, mesh2d.faces):
            raise MismatchedMeshes("face lists differ")
        if mesh3d.n_vertices != mesh2d.n_vertices:
            raise MismatchedMeshes("vertex counts differ")
        self.mesh3d = mesh3d
        self.mesh2d = mesh2d
        f = mesh3d.faces
        v3 = mesh3d.vertices[f]
        v2 = mesh2d.vertices[f]
        E3 = np.stack([v3[:, 1] - v3[:, 0], v3[:, 2] - v3[:, 0]], axis=2)
        E2 = np.stack([v2[:, 1] - v2[:, 0], v2[:, 2] - v2[:, 0]], axis=2)
        det = E2[:, 0, 0] * E2[:, 1, 1] - E2[:, 0, 1] * E2[:, 1, 0]
        bad = np.nonzero(det <= 0)[0]
        if bad.size:
            raise DegenerateTriangle(f"flattened face {int(bad[0])} is folded or has zero area")
        B = E3 @ np.linalg.inv(E2)
        n = mesh3d.face_normals
        J = np.concatenate([B, n[:, :, None]], axis=2)
        self.J_M_from_m = _ro(J)
        self.J_m_from_M = _ro(np.linalg.inv(J))
        self.normals = n
        self.index3d = index3d if index3d is not None else SpatialIndex(mesh3d)
        self.index2d = index2d if index2d is not None else SpatialIndex(mesh2d)
        # bary weight i == 0 puts a point on the edge opposite corner i
        bmask = mesh3d.boundary_half_edges
        self.boundary_opposite = _ro(np.ascontiguousarray(bmask[:, [1, 2, 0]]))

    @property
    def n_faces(self):
        return self.mesh3d.n_faces

    @cached_property
    def vertex_forward(self):
        """3D vertex position -> planar position, keyed by coordinate tuples."""
        return {tuple(p): tuple(q) for p, q in zip(self.mesh3d.vertices.tolist(), self.mesh2d.vertices.tolist())}

    @cached_property
    def vertex_reverse(self):
        return {q: p for p, q in self.vertex_forward.items()}

    @cached_property
    def orientations(self):
        """Per-face on-surface rotation, shape (M, 3, 3)."""
        return _ro(_orientation(self.J_M_from_m))

    def surface_point_3d(self, sp):
        return np.asarray(sp.bary) @ self.mesh3d.vertices[self.mesh3d.faces[sp.face]]

    def surface_point_2d(self, sp):
        return np.asarray(sp.bary) @ self.mesh2d.vertices[self.mesh2d.faces[sp.face]]


def _ro(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _orientation(J_inv):
    # rows: -u axis, u axis x normal, normal; then transposed
    c1 = J_inv[..., :, 0]
    c3 = J_inv[..., :, 2]
    c1 = c1 / np.linalg.norm(c1, axis=-1, keepdims=True)
    c3 = c3 / np.linalg.norm(c3, axis=-1, keepdims=True)
    r2 = np.cross(c1, c3)
    r2 = r2 / np.linalg.norm(r2, axis=-1, keepdims=True)
    rows = np.stack([-c1, r2, c3], axis=-2)
    return np.swapaxes(rows, -1, -2)


def build_manifold_pair(mesh3d, mesh2d):
    return ManifoldPair(mesh3d, mesh2d)


def map_3d_to_task(pair, point, hint=-1):
    """Task coordinates ``(u, v, h)`` of a 3D point and the face it projects to."""
    sp, _ = closest_point_on_mesh(pair.index3d, point, hint)
    uv = pair.surface_point_2d(sp)
    return np.array([uv[0], uv[1], sp.offset_h]), sp.face


def map_task_to_3d(pair, uvh):
    """3D point for task coordinates.

    Returns ``(point, face, outside)``; ``outside`` is set when ``(u, v)`` lies
    outside the flattened disc and was clamped to the closest face.
    """
    u, v = float(uvh[0]), float(uvh[1])
    h = float(uvh[2]) if len(uvh) > 2 else 0.0
    sp, outside = locate_point_2d(pair.index2d, (u, v))
    p = pair.surface_point_3d(sp) + h * pair.normals[sp.face]
    return p, sp.face, outside


def jacobian_at(pair, point, hint=-1):
    """``(J_m_from_M, face)`` of the face closest to ``point``."""
    f, _, _ = pair.index3d.query(point, hint)
    return pair.J_m_from_M[f], f


def orientation_at(pair, point, hint=-1):
    """Rotation whose x axis points along -u, z axis along the face normal."""
    f, _, _ = pair.index3d.query(point, hint)
    return pair.orientations[f]
