"""Per-triangle geometry: barycentric coordinates, normals, mesh statistics."""

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTriangle
from .trimesh import DEGENERATE_AREA


def _tri(face):
    t = np.asarray(face, dtype=np.float64)
    if t.shape[0] != 3 or t.ndim != 2 or t.shape[1] not in (2, 3):
        raise ValueError("triangle must have shape (3, 2) or (3, 3)")
    return t


def triangle_area(face):
    t = _tri(face)
    e1, e2 = t[1] - t[0], t[2] - t[0]
    if t.shape[1] == 2:
        return 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    return 0.5 * float(np.linalg.norm(np.cross(e1, e2)))


def barycentric_coords(point, face, tol=DEGENERATE_AREA):
    """Barycentric coordinates of ``point`` relative to triangle ``face``.

    3D points are orthogonally projected onto the triangle plane first, so
    the result is the least-squares solution of ``sum(b_i V_i) = point``.

    Raises
    ------
    DegenerateTriangle
        If the triangle area is below ``tol``.
    """
    t = _tri(face)
    p = np.asarray(point, dtype=np.float64)
    e1, e2, d = t[1] - t[0], t[2] - t[0], p - t[0]
    a11, a12, a22 = e1 @ e1, e1 @ e2, e2 @ e2
    det = a11 * a22 - a12 * a12
    # det = (2 * area)^2
    if det <= 0 or 0.5 * np.sqrt(det) < tol:
        raise DegenerateTriangle("triangle area below tolerance")
    r1, r2 = d @ e1, d @ e2
    b2 = (a22 * r1 - a12 * r2) / det
    b3 = (a11 * r2 - a12 * r1) / det
    return np.array([1.0 - b2 - b3, b2, b3])


def point_from_barycentric(bary, face):
    """Affine combination ``b1*V1 + b2*V2 + b3*V3``."""
    return np.asarray(bary, dtype=np.float64) @ _tri(face)


def triangle_normal(face, tol=DEGENERATE_AREA):
    """Unit normal of a 3D triangle following the right-hand rule on its winding."""
    t = _tri(face)
    if t.shape[1] != 3:
        raise ValueError("normals need a 3D triangle")
    n = np.cross(t[1] - t[0], t[2] - t[0])
    norm = np.linalg.norm(n)
    if 0.5 * norm < tol:
        raise DegenerateTriangle("triangle area below tolerance")
    return n / norm


@dataclass(frozen=True)
class MeshStats:
    faces: int
    extent: tuple
    surface: float

    def as_dict(self):
        return {"faces": self.faces, "extent_m": list(self.extent), "surface_m2": self.surface}

    def table_row(self, name=""):
        """One row formatted like a scenario table: faces, extent, surface."""
        faces = f"{self.faces / 1000:.1f}k" if self.faces >= 1000 else str(self.faces)
        ext = " x ".join(f"{x:.1f}" for x in self.extent)
        return f"{name}\t{faces}\t{ext}\t{self.surface:.1f}"


def mesh_stats(mesh):
    """Face count, axis-aligned extent (m) and total area (m^2)."""
    v = mesh.vertices3
    ext = v.max(axis=0) - v.min(axis=0) if mesh.n_vertices else np.zeros(3)
    return MeshStats(
        faces=int(mesh.n_faces),
        extent=tuple(float(x) for x in ext),
        surface=float(mesh.face_areas.sum()),
    )
