"""Fixed-boundary disc parametrization (Tutte and Floater mean-value weights)."""

import enum
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .errors import DegenerateAngle, FoldOver, MismatchedMeshes, SolverDivergence, TopologyError
from .mesh.trimesh import TriMesh

#: Boundary vertices must lie this close to the unit circle.
CIRCLE_TOL = 1e-9
#: Relative residual of the interior solve.
SOLVE_RTOL = 1e-10
#: Corner angles this close to pi make mean-value weights blow up.
ANGLE_TOL = 1e-8


class WeightScheme(enum.Enum):
    UNIFORM = "tutte"
    MEAN_VALUE = "meanvalue"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "").replace("_", "")
        for s in cls:
            if v in (s.value, s.name.lower().replace("_", "")):
                return s
        if v == "uniform":
            return cls.UNIFORM
        raise ValueError(f"unknown weight scheme {value!r}")


class FlatMesh(TriMesh):
    """Planar image of a 3D disc mesh, sharing its face list index by index."""

    def __init__(self, uv, faces, boundary, scheme=None, solve_seconds=0.0, iterations=0,
                 boundary_shape="circle"):
        super().__init__(uv, faces, validate=False)
        if self.dimension != 2:
            raise ValueError("flat mesh vertices must be 2D")
        self.boundary = np.asarray(boundary, dtype=np.int64)
        self.scheme = scheme
        self.solve_seconds = solve_seconds
        self.iterations = iterations
        self.boundary_shape = boundary_shape

    def foldovers(self):
        return int(np.count_nonzero(self.signed_areas <= 0))

    def boundary_radius_error(self):
        r = np.linalg.norm(self.vertices[self.boundary], axis=1)
        return float(np.max(np.abs(r - 1.0))) if r.size else 0.0


def extract_boundary_loop(mesh):
    """The single boundary loop in winding order, from its lowest vertex index."""
    loops = mesh.boundary_loops()
    if len(loops) != 1:
        raise TopologyError(f"expected one boundary loop, found {len(loops)}")
    return np.array(loops[0], dtype=np.int64)


def map_boundary_to_circle(loop, source):
    """Place loop vertices on the unit circle, spaced by cumulative 3D chord length."""
    loop = np.asarray(loop, dtype=np.int64)
    p = source.vertices3[loop]
    seg = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    total = seg.sum()
    if total <= 0:
        raise TopologyError("boundary loop has zero length")
    ang = 2.0 * np.pi * np.concatenate([[0.0], np.cumsum(seg[:-1])]) / total
    return np.column_stack([np.cos(ang), np.sin(ang)])


def map_boundary_to_square(loop, source):
    """Place loop vertices on the square [-1, 1]^2 by chord length.

    Experimental: planners on square borders misbehave near the corners.
    """
    loop = np.asarray(loop, dtype=np.int64)
    p = source.vertices3[loop]
    seg = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    s = 8.0 * np.concatenate([[0.0], np.cumsum(seg[:-1])]) / seg.sum()
    # counter-clockwise perimeter starting at (1, 0), i.e. angle 0
    knots = np.array([0.0, 1.0, 3.0, 5.0, 7.0, 8.0])
    px = np.array([1.0, 1.0, -1.0, -1.0, 1.0, 1.0])
    py = np.array([0.0, 1.0, 1.0, -1.0, -1.0, 0.0])
    return np.column_stack([np.interp(s, knots, px), np.interp(s, knots, py)])


def corner_angles(mesh):
    """Interior angle at each face corner, shape (M, 3)."""
    v = mesh.vertices3[mesh.faces]
    ang = np.empty(mesh.faces.shape)
    for i in range(3):
        a = v[:, (i + 1) % 3] - v[:, i]
        b = v[:, (i + 2) % 3] - v[:, i]
        cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang[:, i] = np.arccos(np.clip(cos, -1.0, 1.0))
    return ang


def compute_interior_weights(mesh, scheme=WeightScheme.MEAN_VALUE):
    """Directed edge weights ``w[i, j]`` for every interior vertex ``i``.

    Returns a CSR matrix whose rows of boundary vertices are empty. Uniform
    weights are 1 per neighbour; mean-value weights are
    ``(tan(g/2) + tan(d/2)) / |Pi - Pj|`` with ``g`` and ``d`` the corner
    angles at ``i`` in the two faces sharing edge ``ij``.
    """
    scheme = WeightScheme.parse(scheme)
    n = mesh.n_vertices
    f = mesh.faces
    interior = np.ones(n, dtype=bool)
    interior[np.unique(mesh.edges[_boundary_edge_mask(mesh)])] = False

    rows, cols, vals = [], [], []
    if scheme is WeightScheme.UNIFORM:
        for i in range(3):
            for j in ((i + 1) % 3, (i + 2) % 3):
                rows.append(f[:, i])
                cols.append(f[:, j])
                vals.append(np.full(len(f), 0.5))
    else:
        ang = corner_angles(mesh)
        at_interior = interior[f]
        if np.any(ang[at_interior] >= np.pi - ANGLE_TOL):
            raise DegenerateAngle("corner angle too close to pi for mean-value weights")
        half_tan = np.tan(ang / 2)
        v = mesh.vertices3
        for i in range(3):
            for j in ((i + 1) % 3, (i + 2) % 3):
                length = np.linalg.norm(v[f[:, j]] - v[f[:, i]], axis=1)
                rows.append(f[:, i])
                cols.append(f[:, j])
                vals.append(half_tan[:, i] / length)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.concatenate(vals)
    keep = interior[r]
    W = sparse.coo_matrix((w[keep], (r[keep], c[keep])), shape=(n, n)).tocsr()
    W.sum_duplicates()
    W.sort_indices()
    return W


def _boundary_edge_mask(mesh):
    e_of_h = mesh.half_edge_edge
    mask = np.zeros(mesh.edges.shape[0], dtype=bool)
    mask[e_of_h[mesh.boundary_half_edges.reshape(-1)]] = True
    return mask


def solve_flattening(mesh, boundary_uv, weights, boundary=None, rtol=SOLVE_RTOL, max_iter=None):
    """Solve for interior positions as convex combinations of their neighbours.

    Each interior vertex satisfies ``p_i = sum_j (w_ij / sum_k w_ik) p_j`` with
    boundary vertices fixed at ``boundary_uv``. The row-normalised system is
    solved for u and v separately with ILU-preconditioned BiCGSTAB; the
    iteration cap defaults to ``50 * sqrt(number of interior vertices)``.
    The residual is measured relative to ``|| |L_IB| |p_B| ||``, which equals
    the right-hand-side norm unless boundary terms cancel.
    """
    if boundary is None:
        boundary = extract_boundary_loop(mesh)
    boundary = np.asarray(boundary, dtype=np.int64)
    n = mesh.n_vertices
    uv = np.zeros((n, 2))
    uv[boundary] = boundary_uv
    is_b = np.zeros(n, dtype=bool)
    is_b[boundary] = True
    inner = np.nonzero(~is_b)[0]
    t0 = time.perf_counter()
    iters = 0
    if inner.size:
        W = sparse.csr_matrix(weights)
        if W.data.size and W.data.min() <= 0:
            raise ValueError("weights must be positive")
        rowsum = np.asarray(W.sum(axis=1)).ravel()
        if np.any(rowsum[inner] <= 0):
            raise ValueError("interior vertex without weighted neighbours")
        L = sparse.diags(1.0 / np.where(rowsum > 0, rowsum, 1.0)) @ W
        L_ii = L[inner][:, inner]
        L_ib = L[inner][:, boundary]
        A = (sparse.identity(inner.size, format="csc") - L_ii).tocsc()
        rhs = L_ib @ uv[boundary]
        # residual scale free of cancellation, so symmetric meshes whose
        # right-hand side sums to ~0 are still judged relative to O(1) data
        scale = np.linalg.norm(abs(L_ib) @ np.abs(uv[boundary]), axis=0)
        if max_iter is None:
            max_iter = max(50, int(np.ceil(50 * np.sqrt(inner.size))))
        ilu = spla.spilu(A, drop_tol=1e-4, fill_factor=10, permc_spec="MMD_AT_PLUS_A")
        M = spla.LinearOperator(A.shape, ilu.solve)
        for k in range(2):
            count = [0]

            def cb(_):
                count[0] += 1

            denom = max(scale[k], 1e-300)
            x, info = spla.bicgstab(A, rhs[:, k], rtol=rtol, atol=rtol * denom, maxiter=max_iter,
                                    M=M, callback=cb)
            res = np.linalg.norm(A @ x - rhs[:, k]) / denom
            iters = max(iters, count[0])
            if info != 0 or not np.isfinite(res) or res > rtol * 10:
                raise SolverDivergence(f"coordinate {k}: relative residual {res:.3g} after {count[0]} iterations")
            uv[inner, k] = x
    return uv, time.perf_counter() - t0, iters


def flatten(mesh, scheme=WeightScheme.MEAN_VALUE, boundary_shape="circle", check=True):
    """Flatten a 3D disc mesh to the unit disc.

    Returns a :class:`FlatMesh` whose face list equals ``mesh.faces``.

    Raises
    ------
    FoldOver
        If validation finds a face with non-positive signed area.
    """
    scheme = WeightScheme.parse(scheme)
    t0 = time.perf_counter()
    loop = extract_boundary_loop(mesh)
    if boundary_shape == "circle":
        b_uv = map_boundary_to_circle(loop, mesh)
    elif boundary_shape == "square":
        b_uv = map_boundary_to_square(loop, mesh)
    else:
        raise ValueError(f"unknown boundary shape {boundary_shape!r}")
    W = compute_interior_weights(mesh, scheme)
    uv, _, iters = solve_flattening(mesh, b_uv, W, boundary=loop)
    flat = FlatMesh(uv, mesh.faces, loop, scheme=scheme, solve_seconds=time.perf_counter() - t0,
                    iterations=iters, boundary_shape=boundary_shape)
    if check and flat.foldovers():
        raise FoldOver(f"{flat.foldovers()} flattened faces have non-positive area")
    return flat


@dataclass
class ParamReport:
    foldovers: int
    angular_distortion_deg: dict
    qc_ratio: dict
    boundary_radius_error: float
    solve_seconds: float = 0.0
    per_face_angle_deg: np.ndarray = field(default=None, repr=False)
    per_face_qc: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {
            "foldovers": self.foldovers,
            "angular_distortion_deg": self.angular_distortion_deg,
            "qc_ratio": self.qc_ratio,
            "boundary_radius_error": self.boundary_radius_error,
            "solve_seconds": self.solve_seconds,
        }


def _summary(x):
    return {"min": float(np.min(x)), "mean": float(np.mean(x)), "max": float(np.max(x))}


def face_linear_maps(mesh3d, mesh2d):
    """Per-face linear part of the 2D -> 3D affine map, shape (M, 3, 2)."""
    v3 = mesh3d.vertices3[mesh3d.faces]
    v2 = np.asarray(mesh2d.vertices)[mesh2d.faces][:, :, :2]
    E3 = np.stack([v3[:, 1] - v3[:, 0], v3[:, 2] - v3[:, 0]], axis=2)
    E2 = np.stack([v2[:, 1] - v2[:, 0], v2[:, 2] - v2[:, 0]], axis=2)
    return E3 @ np.linalg.inv(E2)


def validate_parametrization(mesh3d, mesh2d):
    """Fold-over count, angular distortion and quasi-conformal ratio of a flattening."""
    if mesh3d.faces.shape != mesh2d.faces.shape or not np.array_equal(mesh3d.faces, mesh2d.faces):
        raise MismatchedMeshes("face lists differ")
    flat2d = mesh2d if mesh2d.dimension == 2 else TriMesh(mesh2d.vertices[:, :2], mesh2d.faces, validate=False)
    area = flat2d.signed_areas
    folds = int(np.count_nonzero(area <= 0))
    a3 = corner_angles(mesh3d)
    a2 = corner_angles(flat2d)
    per_face = np.degrees(np.abs(a3 - a2).max(axis=1))
    ok = area > 0
    if np.any(ok):
        B = face_linear_maps(mesh3d, flat2d)[ok]
        s = np.linalg.svd(B, compute_uv=False)
        qc = s[:, 0] / s[:, 1]
    else:
        qc = np.array([np.inf])
    boundary = getattr(mesh2d, "boundary", None)
    if boundary is None:
        loops = mesh3d.boundary_loops()
        boundary = np.array(loops[0]) if loops else np.zeros(0, dtype=np.int64)
    r = np.linalg.norm(flat2d.vertices[boundary], axis=1)
    return ParamReport(
        foldovers=folds,
        angular_distortion_deg=_summary(per_face),
        qc_ratio=_summary(qc),
        boundary_radius_error=float(np.max(np.abs(r - 1.0))) if r.size else 0.0,
        solve_seconds=float(getattr(mesh2d, "solve_seconds", 0.0)),
        per_face_angle_deg=per_face,
        per_face_qc=qc,
    )
