"""ASCII OFF and OBJ readers/writers (geometry only)."""

from pathlib import Path

import numpy as np

from ..errors import ParseError
from .trimesh import TriMesh


def _fan(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _tokens(path):
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def read_off(path):
    """Parse an OFF file into ``(vertices, faces)``; polygons are fan-triangulated."""
    it = _tokens(path)
    try:
        lineno, tok = next(it)
    except StopIteration:
        raise ParseError(f"{path}: empty file") from None
    if tok[0] != "OFF":
        raise ParseError(f"{path}:{lineno}: missing OFF header")
    tok = tok[1:]
    if not tok:
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise ParseError(f"{path}: missing element counts") from None
    try:
        nv, nf = int(tok[0]), int(tok[1])
    except (ValueError, IndexError):
        raise ParseError(f"{path}:{lineno}: bad element counts") from None
    verts, faces = [], []
    try:
        for _ in range(nv):
            lineno, tok = next(it)
            if len(tok) < 3:
                raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
            verts.append([float(x) for x in tok[:3]])
        for _ in range(nf):
            lineno, tok = next(it)
            n = int(tok[0])
            if n < 3 or len(tok) < n + 1:
                raise ParseError(f"{path}:{lineno}: bad face record")
            faces.extend(_fan([int(x) for x in tok[1:n + 1]]))
    except StopIteration:
        raise ParseError(f"{path}: file ends before all elements are read") from None
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: {exc}") from None
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def read_obj(path):
    """Parse ``v`` and ``f`` records of an OBJ file; everything else is ignored."""
    verts, faces = [], []
    for lineno, tok in _tokens(path):
        try:
            if tok[0] == "v":
                if len(tok) < 4:
                    raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
                verts.append([float(x) for x in tok[1:4]])
            elif tok[0] == "f":
                idx = []
                for t in tok[1:]:
                    i = int(t.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ParseError(f"{path}:{lineno}: face needs 3 vertices")
                faces.extend(_fan(idx))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def load_mesh(path, format=None, validate=True):
    """Read an OFF or OBJ file into a validated :class:`TriMesh`.

    ``format`` defaults to the file suffix.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    if fmt == "OFF":
        v, f = read_off(path)
    elif fmt == "OBJ":
        v, f = read_obj(path)
    else:
        raise ParseError(f"unsupported mesh format {fmt!r}")
    return TriMesh(v, f, validate=validate)


def save_off(path, mesh_or_vertices, faces=None):
    """Write an OFF file; 2D vertices are written with z = 0."""
    if faces is None:
        v, f = mesh_or_vertices.vertices3, mesh_or_vertices.faces
    else:
        v = np.asarray(mesh_or_vertices, dtype=float)
        f = np.asarray(faces, dtype=np.int64)
        if v.shape[1] == 2:
            v = np.column_stack([v, np.zeros(len(v))])
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(v)} {len(f)} 0\n")
        np.savetxt(fh, v, fmt="%.17g")
        np.savetxt(fh, np.column_stack([np.full(len(f), 3), f]), fmt="%d")


def save_obj(path, mesh):
    with open(path, "w") as fh:
        np.savetxt(fh, mesh.vertices3, fmt="v %.17g %.17g %.17g")
        np.savetxt(fh, mesh.faces + 1, fmt="f %d %d %d")
