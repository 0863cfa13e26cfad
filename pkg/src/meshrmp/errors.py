"""Exception hierarchy shared by all subpackages."""


class MeshRMPError(Exception):
    """Base class for every error raised by this package."""


class ParseError(MeshRMPError):
    """Raised when a mesh file does not parse as the declared format."""


class TopologyError(MeshRMPError):
    """Raised when a mesh is not an orientable, edge-manifold disc."""


class DegenerateTriangle(MeshRMPError):
    """Raised for triangles whose area is below tolerance."""


class EmptyMesh(MeshRMPError):
    """Raised when a spatial query is issued against an empty index."""


class DegenerateAngle(MeshRMPError):
    """Raised when a corner angle is too close to pi for mean-value weights."""


class SolverDivergence(MeshRMPError):
    """Raised when the flattening solve misses its residual target."""


class FoldOver(MeshRMPError):
    """Raised when a flattened face has non-positive signed area."""


class MismatchedMeshes(MeshRMPError):
    """Raised when a 3D mesh and a flat mesh do not share a face list."""


class GoalOutsideDisc(MeshRMPError):
    """Raised when a planar goal lies outside the flattened disc."""


class NonFiniteState(MeshRMPError):
    """Raised when integration produces NaN or infinite state."""

    def __init__(self, message, step=None, position=None, velocity=None):
        super().__init__(message)
        self.step = step
        self.position = position
        self.velocity = velocity


class DegenerateTrajectory(MeshRMPError):
    """Raised when a trajectory has fewer than two non-zero segments."""


class ZeroGeodesic(MeshRMPError):
    """Raised when a length ratio is requested against a zero-length geodesic."""


class Unreachable(MeshRMPError):
    """Raised when no graph path joins the two query points."""
