"""Indexed triangle mesh with disc-topology validation."""

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DegenerateTriangle, TopologyError

#: Faces with a smaller area (m^2) reject the mesh.
DEGENERATE_AREA = 1e-12

BARY_TOL = 1e-9


@dataclass(frozen=True)
class SurfacePoint:
    """A location on a mesh: face index, barycentric weights and normal offset."""

    face: int
    bary: tuple
    offset_h: float = 0.0

    def __post_init__(self):
        b = tuple(float(x) for x in self.bary)
        if len(b) != 3:
            raise ValueError("bary must have three components")
        if abs(sum(b) - 1.0) > BARY_TOL:
            raise ValueError(f"barycentric weights sum to {sum(b)!r}, expected 1")
        object.__setattr__(self, "bary", b)
        object.__setattr__(self, "face", int(self.face))
        object.__setattr__(self, "offset_h", float(self.offset_h))


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class TriMesh:
    """Triangle mesh in 2D or 3D.

    Parameters
    ----------
    vertices : array_like, shape (N, 2) or (N, 3)
        Vertex coordinates in meters.
    faces : array_like, shape (M, 3)
        Vertex indices per face.
    validate : bool
        Check disc topology and orient the faces consistently. Meshes built
        with ``validate=False`` (e.g. closed surfaces) are only fit for
        measurements such as :func:`mesh_stats`.

    Notes
    -----
    With validation, faces whose winding disagrees with their neighbours are
    flipped (breadth-first from face 0, which keeps its winding). A mesh that
    cannot be oriented, is not edge-manifold, has a degenerate face, or does
    not have exactly one boundary loop raises :class:`TopologyError`.
    """

    def __init__(self, vertices, faces, validate=True):
        v = np.array(vertices, dtype=np.float64)
        f = np.array(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise ValueError("vertices must have shape (N, 2) or (N, 3)")
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError("faces must have shape (M, 3)")
        self.vertices = _readonly(v)
        self.faces = _readonly(f)
        self.validated = False
        if validate:
            self._validate()
            self.validated = True

    # ------------------------------------------------------------------
    @property
    def dimension(self):
        return self.vertices.shape[1]

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    def __repr__(self):
        return f"TriMesh(n_vertices={self.n_vertices}, n_faces={self.n_faces}, dim={self.dimension})"

    @property
    def vertices3(self):
        """Vertices padded to 3D (z = 0 for planar meshes)."""
        if self.dimension == 3:
            return self.vertices
        return self._padded

    @cached_property
    def _padded(self):
        return _readonly(np.column_stack([self.vertices, np.zeros(self.n_vertices)]))

    # ------------------------------------------------------------------
    # geometry
    @cached_property
    def _cross(self):
        v = self.vertices3
        a, b, c = v[self.faces[:, 0]], v[self.faces[:, 1]], v[self.faces[:, 2]]
        return np.cross(b - a, c - a)

    @cached_property
    def face_areas(self):
        return _readonly(0.5 * np.linalg.norm(self._cross, axis=1))

    @cached_property
    def signed_areas(self):
        """Signed areas of a planar mesh (positive for counter-clockwise faces)."""
        if self.dimension != 2:
            raise ValueError("signed areas are only defined for 2D meshes")
        return _readonly(0.5 * self._cross[:, 2])

    @cached_property
    def face_normals(self):
        n = self._cross
        norm = np.linalg.norm(n, axis=1)
        if np.any(norm <= 0):
            raise DegenerateTriangle("mesh contains zero-area faces")
        return _readonly(n / norm[:, None])

    @cached_property
    def face_centroids(self):
        return _readonly(self.vertices3[self.faces].mean(axis=1))

    @cached_property
    def diameter(self):
        """Length of the bounding-box diagonal."""
        ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(ext))

    # ------------------------------------------------------------------
    # connectivity
    @cached_property
    def _half_edges(self):
        f = self.faces
        src = f.reshape(-1)
        dst = f[:, [1, 2, 0]].reshape(-1)
        n = max(self.n_vertices, 1)
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        key = lo * n + hi
        return src, dst, key

    @cached_property
    def edges(self):
        """Unique undirected edges, shape (E, 2), sorted lexicographically."""
        src, dst, key = self._half_edges
        _, first = np.unique(key, return_index=True)
        e = np.column_stack([np.minimum(src, dst)[first], np.maximum(src, dst)[first]])
        return _readonly(e)

    @cached_property
    def _edge_map(self):
        # half-edge h = 3*face + i runs from corner i to corner i+1
        src, dst, key = self._half_edges
        uniq, inverse, counts = np.unique(key, return_inverse=True, return_counts=True)
        return inverse, counts

    @cached_property
    def half_edge_edge(self):
        """Index into :attr:`edges` for every half-edge (3*face + corner)."""
        return _readonly(self._edge_map[0])

    @cached_property
    def face_adjacency(self):
        """Neighbour across each face edge, shape (M, 3); -1 on the boundary.

        Column ``i`` holds the face across the edge from corner ``i`` to
        corner ``i + 1``.
        """
        inverse, counts = self._edge_map
        nh = inverse.size
        adj = np.full(nh, -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        sorted_e = inverse[order]
        # pairs of half-edges on interior edges sit next to each other
        same = np.nonzero(sorted_e[1:] == sorted_e[:-1])[0]
        h1, h2 = order[same], order[same + 1]
        adj[h1] = h2 // 3
        adj[h2] = h1 // 3
        return _readonly(adj.reshape(-1, 3))

    @cached_property
    def boundary_half_edges(self):
        """Boolean mask (M, 3) of face edges that lie on the boundary."""
        inverse, counts = self._edge_map
        return _readonly((counts[inverse] == 1).reshape(-1, 3))

    @cached_property
    def vertex_neighbors(self):
        """Sorted 1-ring neighbour indices per vertex."""
        e = self.edges
        nbrs = [[] for _ in range(self.n_vertices)]
        for a, b in e.tolist():
            nbrs[a].append(b)
            nbrs[b].append(a)
        return [sorted(x) for x in nbrs]

    def boundary_loops(self):
        """All boundary loops, each following the face winding.

        Every loop starts at its lowest vertex index; loops are sorted by that
        start vertex.
        """
        src, dst, _ = self._half_edges
        mask = self.boundary_half_edges.reshape(-1)
        bsrc, bdst = src[mask], dst[mask]
        nxt = {}
        for a, b in zip(bsrc.tolist(), bdst.tolist()):
            if a in nxt:
                raise TopologyError(f"vertex {a} has more than one outgoing boundary edge")
            nxt[a] = b
        if len(set(nxt.values())) != len(nxt):
            raise TopologyError("a vertex has more than one incoming boundary edge")
        loops = []
        remaining = set(nxt)
        while remaining:
            start = min(remaining)
            loop = [start]
            remaining.discard(start)
            cur = nxt[start]
            while cur != start:
                if cur not in remaining:
                    raise TopologyError("boundary edges do not form closed loops")
                loop.append(cur)
                remaining.discard(cur)
                cur = nxt[cur]
            loops.append(loop)
        return loops

    # ------------------------------------------------------------------
    def _validate(self):
        v, f = self.vertices, self.faces
        nv = self.n_vertices
        if f.shape[0] == 0:
            raise TopologyError("mesh has no faces")
        if f.min() < 0 or f.max() >= nv:
            raise TopologyError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise TopologyError("face references the same vertex twice")
        if np.unique(f).size != nv:
            raise TopologyError("mesh has vertices not referenced by any face")
        small = np.nonzero(self.face_areas < DEGENERATE_AREA)[0]
        if small.size:
            raise TopologyError(f"degenerate face {int(small[0])} (area {self.face_areas[small[0]]:.3g})")
        _, counts = self._edge_map
        if np.any(counts > 2):
            raise TopologyError("non-manifold edge shared by more than two faces")

        self._orient()

        loops = self.boundary_loops()
        if len(loops) == 0:
            raise TopologyError("mesh has no boundary loop (closed surface)")
        if len(loops) > 1:
            raise TopologyError(f"mesh has {len(loops)} boundary loops, expected 1")
        euler = nv - self.edges.shape[0] + self.n_faces
        if euler != 1:
            raise TopologyError(f"Euler characteristic {euler} is not that of a disc")
        if self.dimension == 3:
            self._check_normals()

    def _orient(self):
        f = self.faces
        src = self._half_edges[0]
        adj = self.face_adjacency
        m = self.n_faces
        # same[h] is True when the neighbour runs the shared edge in the same direction
        same = np.zeros(3 * m, dtype=bool)
        inverse, _ = self._edge_map
        order = np.argsort(inverse, kind="stable")
        sorted_e = inverse[order]
        pair = np.nonzero(sorted_e[1:] == sorted_e[:-1])[0]
        h1, h2 = order[pair], order[pair + 1]
        s = src[h1] == src[h2]
        same[h1] = s
        same[h2] = s

        flip = np.full(m, -1, dtype=np.int8)
        flip[0] = 0
        adj_l = adj.tolist()
        same_l = same.reshape(-1, 3).tolist()
        flip_l = flip.tolist()
        queue = deque([0])
        while queue:
            a = queue.popleft()
            fa = flip_l[a]
            for k in range(3):
                b = adj_l[a][k]
                if b < 0 or flip_l[b] >= 0:
                    continue
                flip_l[b] = fa ^ int(same_l[a][k])
                queue.append(b)
        flip = np.array(flip_l, dtype=np.int8)
        if np.any(flip < 0):
            raise TopologyError("mesh is not connected")
        fl = flip.repeat(3)
        ok = (fl[h1] ^ fl[h2]) == s.astype(np.int8)
        if not np.all(ok):
            raise TopologyError("mesh is not orientable")
        if np.any(flip):
            nf = f.copy()
            sel = flip.astype(bool)
            nf[sel] = nf[sel][:, [0, 2, 1]]
            self.faces = _readonly(nf)
            for name in ("_half_edges", "_edge_map", "face_adjacency", "boundary_half_edges",
                         "_cross", "face_normals", "edges", "half_edge_edge"):
                self.__dict__.pop(name, None)

    def _check_normals(self):
        n = self.face_normals
        adj = self.face_adjacency
        fi, k = np.nonzero(adj >= 0)
        dots = np.einsum("ij,ij->i", n[fi], n[adj[fi, k]])
        bad = np.nonzero(dots <= 0)[0]
        if bad.size:
            a, b = int(fi[bad[0]]), int(adj[fi[bad[0]], k[bad[0]]])
            raise TopologyError(f"normals of adjacent faces {a} and {b} differ by 90 degrees or more")
