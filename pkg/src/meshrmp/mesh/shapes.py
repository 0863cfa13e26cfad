"""Procedural meshes used by tests and the synthetic scenarios."""

import numpy as np

from .trimesh import TriMesh


def grid_square(n=1, size=1.0, validate=True):
    """Square ``[0, size]^2`` split into ``n x n`` cells, two triangles each."""
    t = np.linspace(0.0, size, n + 1)
    x, y = np.meshgrid(t, t, indexing="xy")
    v = np.column_stack([x.ravel(), y.ravel(), np.zeros(x.size)])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, :-1].ravel(), idx[1:, 1:].ravel()
    f = np.concatenate([np.column_stack([a, b, d]), np.column_stack([a, d, c])])
    return TriMesh(v, f, validate=validate)


def hex_disc(rings):
    """Planar unit disc from concentric rings, ring ``r`` holding ``6r`` vertices.

    Returns ``(vertices2d, faces)``; faces are counter-clockwise and number
    ``6 * rings**2``.
    """
    pts = [np.zeros((1, 2))]
    starts = [0]
    n = 1
    for r in range(1, rings + 1):
        k = 6 * r
        ang = 2.0 * np.pi * np.arange(k) / k
        pts.append(r / rings * np.column_stack([np.cos(ang), np.sin(ang)]))
        starts.append(n)
        n += k
    faces = []
    for j in range(6):
        faces.append((0, 1 + j, 1 + (j + 1) % 6))
    for r in range(2, rings + 1):
        n0, n1 = 6 * (r - 1), 6 * r
        s0, s1 = starts[r - 1], starts[r]
        i = j = 0
        while i < n0 or j < n1:
            # advance whichever ring's next vertex comes first by angle
            ti = (i + 1) / n0 if i < n0 else np.inf
            tj = (j + 1) / n1 if j < n1 else np.inf
            a0, a1 = s0 + i % n0, s1 + j % n1
            if tj <= ti:
                faces.append((a0, a1, s1 + (j + 1) % n1))
                j += 1
            else:
                faces.append((a0, a1, s0 + (i + 1) % n0))
                i += 1
    return np.vstack(pts), np.array(faces, dtype=np.int64)


def hex_fan(radius=1.0, z=0.0, center_z=0.0):
    """Regular hexagon around one interior vertex (6 equilateral faces for z = 0)."""
    ang = np.pi / 3 * np.arange(6)
    ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.full(6, z)])
    v = np.vstack([[0.0, 0.0, center_z], ring])
    f = [(0, 1 + j, 1 + (j + 1) % 6) for j in range(6)]
    return TriMesh(v, f)


def icosphere(subdivisions=3, radius=1.0):
    """Closed icosphere with ``20 * 4**subdivisions`` faces (not a disc; unvalidated)."""
    t = (1.0 + 5 ** 0.5) / 2.0
    v = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        nf = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nf
    return TriMesh(radius * np.array(verts), faces, validate=False)


def submesh(vertices, faces, keep, validate=True):
    """Mesh made of the faces selected by boolean mask ``keep``, reindexed."""
    f = np.asarray(faces)[keep]
    used, inv = np.unique(f, return_inverse=True)
    return TriMesh(np.asarray(vertices)[used], inv.reshape(-1, 3), validate=validate)


def sphere_cap(subdivisions=3, z_min=-0.5, radius=1.0):
    """Icosphere faces whose centroid lies above ``z_min * radius``."""
    s = icosphere(subdivisions, radius)
    keep = s.face_centroids[:, 2] > z_min * radius
    return submesh(s.vertices, s.faces, keep)


def hemisphere(rings=12, radius=1.0, jitter=0.0, seed=0):
    """Upper hemisphere lifted from a ring disc by equal-angle latitude.

    ``jitter`` perturbs interior disc vertices (fraction of the ring spacing)
    to make the triangulation irregular.
    """
    v2, f = hex_disc(rings)
    if jitter:
        rng = np.random.default_rng(seed)
        r = np.linalg.norm(v2, axis=1)
        inner = r < 1.0 - 1e-9
        v2 = v2.copy()
        v2[inner] += jitter / rings * rng.uniform(-1, 1, size=(inner.sum(), 2))
    r = np.linalg.norm(v2, axis=1)
    phi = np.arctan2(v2[:, 1], v2[:, 0])
    theta = r * np.pi / 2
    v = radius * np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    return TriMesh(v, f)
