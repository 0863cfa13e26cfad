"""Triangle-mesh storage, file I/O, spatial indexing and barycentric geometry."""

from .geometry import (
    MeshStats,
    barycentric_coords,
    mesh_stats,
    point_from_barycentric,
    triangle_area,
    triangle_normal,
)
from .io import load_mesh, read_obj, read_off, save_obj, save_off
from .spatial import SpatialIndex, closest_point_on_mesh, locate_point_2d
from .trimesh import DEGENERATE_AREA, SurfacePoint, TriMesh

__all__ = [
    "DEGENERATE_AREA",
    "MeshStats",
    "SpatialIndex",
    "SurfacePoint",
    "TriMesh",
    "barycentric_coords",
    "closest_point_on_mesh",
    "load_mesh",
    "locate_point_2d",
    "mesh_stats",
    "point_from_barycentric",
    "read_obj",
    "read_off",
    "save_obj",
    "save_off",
    "triangle_area",
    "triangle_normal",
]
