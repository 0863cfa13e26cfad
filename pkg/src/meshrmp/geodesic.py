"""Approximate surface geodesics on a Steiner-point graph.

Graph paths are polylines on the surface, so their lengths bound the exact
polyhedral geodesic from above; more Steiner points tighten the bound.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import Unreachable

DEFAULT_K = 4
#: First Dijkstra radius as a multiple of the start-goal chord.
SEARCH_FACTOR = 1.5


@dataclass(eq=False)
class GeodesicGraph:
    """Nodes (vertices then ``k`` points per edge) with intra-face arcs."""

    nodes: np.ndarray
    face_nodes: np.ndarray
    arcs: np.ndarray
    lengths: np.ndarray
    k: int
    n_vertices: int
    n_edges: int

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_arcs(self):
        return len(self.arcs)

    @cached_property
    def adjacency(self):
        """Symmetric CSR adjacency over the graph nodes."""
        n = self.n_nodes
        a, w = self.arcs, self.lengths
        G = sparse.csr_matrix((w, (a[:, 0], a[:, 1])), shape=(n, n))
        return (G + G.T).tocsr()

    def augmented(self, extra_arcs, extra_lengths, n_extra):
        """Adjacency with ``n_extra`` virtual nodes appended after the graph nodes."""
        base = self.adjacency
        n = self.n_nodes + n_extra
        indptr = np.concatenate([base.indptr, np.full(n_extra, base.indptr[-1])])
        padded = sparse.csr_matrix((base.data, base.indices, indptr), shape=(n, n))
        a, w = extra_arcs, extra_lengths
        E = sparse.csr_matrix((np.concatenate([w, w]),
                               (np.concatenate([a[:, 0], a[:, 1]]), np.concatenate([a[:, 1], a[:, 0]]))),
                              shape=(n, n))
        return (padded + E).tocsr()


def build_geodesic_graph(mesh, k=DEFAULT_K):
    """Steiner graph with ``k`` uniformly spaced points on every edge.

    Every pair of nodes on a common face is joined by an arc whose weight is
    the 3D distance between them.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    v = mesh.vertices3
    edges = mesh.edges
    nv, ne = mesh.n_vertices, len(edges)
    t = np.arange(1, k + 1) / (k + 1)
    steiner = (v[edges[:, 0]][:, None, :] * (1 - t)[None, :, None]
               + v[edges[:, 1]][:, None, :] * t[None, :, None]).reshape(-1, 3)
    nodes = np.vstack([v, steiner])

    he = mesh.half_edge_edge.reshape(-1, 3)
    per_face = [mesh.faces]
    if k:
        base = nv + he * k
        per_face.append((base[:, :, None] + np.arange(k)[None, None, :]).reshape(len(mesh.faces), -1))
    face_nodes = np.hstack(per_face)

    m = face_nodes.shape[1]
    ii, jj = np.triu_indices(m, 1)
    a = face_nodes[:, ii].ravel()
    b = face_nodes[:, jj].ravel()
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    key = np.unique(lo.astype(np.int64) * len(nodes) + hi)
    lo, hi = key // len(nodes), key % len(nodes)
    lengths = np.linalg.norm(nodes[hi] - nodes[lo], axis=1)
    arcs = np.column_stack([lo, hi])
    return GeodesicGraph(nodes, face_nodes, arcs, lengths, k, nv, ne)


def _surface_xyz(mesh, sp):
    return np.asarray(sp.bary) @ mesh.vertices3[mesh.faces[sp.face]]


def _attach(graph, mesh, points):
    """Virtual nodes for surface points, each linked to the nodes of its face."""
    base = graph.n_nodes
    arcs, lens = [], []
    xyz = np.array([_surface_xyz(mesh, p) for p in points]).reshape(-1, 3)
    for i, sp in enumerate(points):
        fn = graph.face_nodes[sp.face]
        d = np.linalg.norm(graph.nodes[fn] - xyz[i], axis=1)
        arcs.append(np.column_stack([np.full(len(fn), base + i), fn]))
        lens.append(d)
    # virtual nodes sharing a face see each other directly
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i].face == points[j].face:
                arcs.append(np.array([[base + i, base + j]]))
                lens.append(np.array([np.linalg.norm(xyz[i] - xyz[j])]))
    arcs = np.vstack(arcs).astype(np.int64)
    lens = np.concatenate(lens)
    # zero-length arcs would vanish from the sparse matrix
    lens = np.maximum(lens, 1e-300)
    return xyz, arcs, lens


def shortest_surface_paths(graph, mesh, pairs, search_factor=SEARCH_FACTOR):
    """Graph geodesics for many ``(start, goal)`` surface point pairs.

    All query points become virtual nodes of one augmented graph; a virtual
    node never shortcuts other paths because it only links nodes of a single
    face. Each search is bounded by ``search_factor`` times the chord and the
    bound doubles until the goal is settled, so results match an unbounded
    search. Returns a list of ``(polyline, length)``.
    """
    pairs = list(pairs)
    if not pairs:
        return []
    pts = [p for pair in pairs for p in pair]
    xyz, arcs, lens = _attach(graph, mesh, pts)
    G = graph.augmented(arcs, lens, len(pts))
    nodes = np.vstack([graph.nodes, xyz])
    base = graph.n_nodes
    reach = 2.0 * np.linalg.norm(np.ptp(graph.nodes, axis=0)) * max(1.0, search_factor)
    out = []
    for q in range(len(pairs)):
        s, g = base + 2 * q, base + 2 * q + 1
        a, b = xyz[2 * q], xyz[2 * q + 1]
        chord = float(np.linalg.norm(b - a))
        if chord == 0.0:
            out.append((a[None, :].copy(), 0.0))
            continue
        limit = search_factor * chord
        while True:
            dist, pred = csgraph.dijkstra(G, directed=True, indices=s, limit=limit,
                                          return_predecessors=True)
            if np.isfinite(dist[g]) or limit > reach:
                break
            limit *= 2.0
        if not np.isfinite(dist[g]):
            raise Unreachable(f"no path between query points of pair {q}")
        path = [g]
        while path[-1] != s:
            path.append(pred[path[-1]])
        poly = nodes[np.array(path[::-1])]
        out.append((poly, float(np.linalg.norm(np.diff(poly, axis=0), axis=1).sum())))
    return out


def shortest_surface_path(graph, mesh, start, goal):
    """Polyline and length (m) of the graph geodesic between two surface points."""
    return shortest_surface_paths(graph, mesh, [(start, goal)])[0]
