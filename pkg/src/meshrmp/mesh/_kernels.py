"""Compiled kernels: closest point on triangle and AABB tree build/query."""

import numba as nb
import numpy as np

#: Distances within this bound (m) count as ties; lowest face index wins.
TIE_TOL = 1e-12


@nb.njit(cache=True, nogil=True, inline="always")
def closest_bary(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    """Barycentric weights of the closest point on triangle abc (Ericson's regions)."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return 1.0, 0.0, 0.0
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return 0.0, 1.0, 0.0
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return 1.0 - v, v, 0.0
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return 0.0, 0.0, 1.0
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return 1.0 - w, 0.0, w
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return 0.0, 1.0 - w, w
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    u = 1.0 - v - w
    if u < 0.0:
        u = 0.0
        s = v + w
        v /= s
        w /= s
    return u, v, w


@nb.njit(cache=True, nogil=True, inline="always")
def face_distance(V, F, f, px, py, pz):
    i, j, k = F[f, 0], F[f, 1], F[f, 2]
    b1, b2, b3 = closest_bary(px, py, pz,
                              V[i, 0], V[i, 1], V[i, 2],
                              V[j, 0], V[j, 1], V[j, 2],
                              V[k, 0], V[k, 1], V[k, 2])
    qx = b1 * V[i, 0] + b2 * V[j, 0] + b3 * V[k, 0]
    qy = b1 * V[i, 1] + b2 * V[j, 1] + b3 * V[k, 1]
    qz = b1 * V[i, 2] + b2 * V[j, 2] + b3 * V[k, 2]
    d = np.sqrt((px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2)
    return d, b1, b2, b3


@nb.njit(cache=True, nogil=True, inline="always")
def _share_vertex(F, f, g):
    for a in range(3):
        for b in range(3):
            if F[f, a] == F[g, b]:
                return True
    return False


@nb.njit(cache=True)
def build_bvh(face_lo, face_hi, centroids, leaf_size):
    m = face_lo.shape[0]
    order = np.arange(m)
    cap = max(2 * m, 1)
    node_lo = np.empty((cap, 3))
    node_hi = np.empty((cap, 3))
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    start = np.zeros(cap, dtype=np.int64)
    count = np.zeros(cap, dtype=np.int64)
    stack = np.empty((128, 3), dtype=np.int64)
    sp = 0
    n_nodes = 1
    stack[0, 0], stack[0, 1], stack[0, 2] = 0, 0, m
    sp = 1
    while sp > 0:
        sp -= 1
        node, s, e = stack[sp, 0], stack[sp, 1], stack[sp, 2]
        for d in range(3):
            lo = np.inf
            hi = -np.inf
            for q in range(s, e):
                f = order[q]
                if face_lo[f, d] < lo:
                    lo = face_lo[f, d]
                if face_hi[f, d] > hi:
                    hi = face_hi[f, d]
            node_lo[node, d] = lo
            node_hi[node, d] = hi
        if e - s <= leaf_size:
            start[node] = s
            count[node] = e - s
            continue
        axis = 0
        best = -1.0
        for d in range(3):
            lo = np.inf
            hi = -np.inf
            for q in range(s, e):
                c = centroids[order[q], d]
                if c < lo:
                    lo = c
                if c > hi:
                    hi = c
            if hi - lo > best:
                best = hi - lo
                axis = d
        sub = order[s:e].copy()
        keys = centroids[sub, axis]
        srt = np.argsort(keys, kind="mergesort")
        order[s:e] = sub[srt]
        mid = (s + e) // 2
        l, r = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node] = l
        right[node] = r
        stack[sp, 0], stack[sp, 1], stack[sp, 2] = l, s, mid
        sp += 1
        stack[sp, 0], stack[sp, 1], stack[sp, 2] = r, mid, e
        sp += 1
    return (node_lo[:n_nodes].copy(), node_hi[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), start[:n_nodes].copy(), count[:n_nodes].copy(), order)


@nb.njit(cache=True, nogil=True, inline="always")
def _box_dist(node_lo, node_hi, n, px, py, pz):
    s = 0.0
    for d, p in ((0, px), (1, py), (2, pz)):
        if p < node_lo[n, d]:
            g = node_lo[n, d] - p
            s += g * g
        elif p > node_hi[n, d]:
            g = p - node_hi[n, d]
            s += g * g
    return np.sqrt(s)


@nb.njit(cache=True, nogil=True)
def query_closest(node_lo, node_hi, left, right, start, count, order, V, F, adj,
                  px, py, pz, hint):
    """Closest face to point p.

    ``hint`` (or -1) seeds the search with a face and its edge neighbours;
    tree traversal still runs, so the answer is the global minimum. Returns
    ``(face, b1, b2, b3, distance, tie)`` where ``tie`` is 1 when a face not
    sharing a vertex with the winner is equally close.
    """
    best_f = -1
    best_d = np.inf
    b1 = b2 = b3 = 0.0
    tie = 0
    if hint >= 0:
        for c in range(4):
            f = hint if c == 0 else adj[hint, c - 1]
            if f < 0:
                continue
            d, c1, c2, c3 = face_distance(V, F, f, px, py, pz)
            if d < best_d - TIE_TOL or (d <= best_d + TIE_TOL and f < best_f):
                if d < best_d - TIE_TOL:
                    tie = 0
                best_f = f
                best_d = min(d, best_d)
                b1, b2, b3 = c1, c2, c3
    stack = np.empty(128, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        if _box_dist(node_lo, node_hi, n, px, py, pz) > best_d + TIE_TOL:
            continue
        if left[n] < 0:
            for q in range(start[n], start[n] + count[n]):
                f = order[q]
                if f == best_f:
                    continue
                d, c1, c2, c3 = face_distance(V, F, f, px, py, pz)
                if d < best_d - TIE_TOL:
                    best_f = f
                    best_d = d
                    b1, b2, b3 = c1, c2, c3
                    tie = 0
                elif d <= best_d + TIE_TOL:
                    if not _share_vertex(F, f, best_f):
                        tie = 1
                    if f < best_f:
                        best_f = f
                        b1, b2, b3 = c1, c2, c3
                    if d < best_d:
                        best_d = d
        else:
            l, r = left[n], right[n]
            dl = _box_dist(node_lo, node_hi, l, px, py, pz)
            dr = _box_dist(node_lo, node_hi, r, px, py, pz)
            # push the farther child first so the nearer one is expanded next
            if dl <= dr:
                stack[sp] = r
                stack[sp + 1] = l
            else:
                stack[sp] = l
                stack[sp + 1] = r
            sp += 2
    return best_f, b1, b2, b3, best_d, tie


@nb.njit(cache=True, nogil=True)
def query_many(node_lo, node_hi, left, right, start, count, order, V, F, adj, P):
    n = P.shape[0]
    faces = np.empty(n, dtype=np.int64)
    bary = np.empty((n, 3))
    dist = np.empty(n)
    hint = -1
    for i in range(n):
        f, b1, b2, b3, d, _ = query_closest(node_lo, node_hi, left, right, start, count, order,
                                            V, F, adj, P[i, 0], P[i, 1], P[i, 2], hint)
        faces[i] = f
        bary[i, 0], bary[i, 1], bary[i, 2] = b1, b2, b3
        dist[i] = d
        hint = f
    return faces, bary, dist
