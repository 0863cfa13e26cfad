"""Seeded synthetic disc meshes used as benchmark scenes.

All scenes start from the ring-disc triangulation of :func:`hex_disc`, stretched
to an elliptical footprint, then lifted into 3D:

``plate``
    Flat elliptical plate.
``wave``
    Sinusoidal height field, a smooth rolling surface with about 16k faces.
``bend``
    Developable quarter-pipe: a floor that curves up into a wall.
``fractal``
    Fractional-Brownian value-noise terrain with about 126k faces.
"""

import numpy as np
from scipy import ndimage

from ..mesh.shapes import hex_disc
from ..mesh.trimesh import TriMesh

SCENARIO_PREFIX = "scenario:"


def _ellipse(rings, a, b):
    v2, f = hex_disc(rings)
    return v2 * np.array([a, b]), f


def plate(rings=20, a=2.0, b=1.5, seed=0):
    """Flat 4 m x 3 m elliptical plate in the z = 0 plane."""
    xy, f = _ellipse(rings, a, b)
    return TriMesh(np.column_stack([xy, np.zeros(len(xy))]), f)


def wave(rings=52, a=10.0, b=5.0, amplitude=0.6, wavelength=(8.0, 6.0), seed=0):
    """``z = A sin(2 pi x / lx) cos(2 pi y / ly)`` over a 20 m x 10 m ellipse."""
    xy, f = _ellipse(rings, a, b)
    lx, ly = wavelength
    z = amplitude * np.sin(2 * np.pi * xy[:, 0] / lx) * np.cos(2 * np.pi * xy[:, 1] / ly)
    return TriMesh(np.column_stack([xy, z]), f)


def bend(rings=30, a=5.0, b=4.0, radius=3.0, seed=0):
    """Floor rolling into a vertical wall through a quarter cylinder of ``radius``.

    The footprint is an ellipse in developed (arc length, width) coordinates,
    centred on the middle of the curved section, so the surface is isometric
    to a planar ellipse.
    """
    sy, f = _ellipse(rings, a, b)
    arc = 0.5 * np.pi * radius
    s = sy[:, 0] + 0.5 * arc
    y = sy[:, 1]
    phi = np.clip(s, 0.0, arc) / radius
    x = radius * np.sin(phi) + np.where(s < 0.0, s, 0.0)
    z = radius * (1.0 - np.cos(phi)) + np.where(s > arc, s - arc, 0.0)
    return TriMesh(np.column_stack([x, y, z]), f)


def value_noise(xy, seed=0, octaves=5, base_cells=4, persistence=0.5, extent=None):
    """Fractional-Brownian value noise in roughly ``[-1, 1]`` at points ``xy``.

    Each octave samples a seeded random lattice with cubic-spline
    interpolation; octave ``o`` has ``base_cells * 2**o`` cells across
    ``extent`` and weight ``persistence**o``.
    """
    rng = np.random.default_rng(seed)
    lo = xy.min(axis=0) if extent is None else np.asarray(extent[0])
    hi = xy.max(axis=0) if extent is None else np.asarray(extent[1])
    t = (xy - lo) / np.maximum(hi - lo, 1e-12)
    out = np.zeros(len(xy))
    norm = 0.0
    for o in range(octaves):
        cells = base_cells * 2 ** o
        lattice = rng.uniform(-1.0, 1.0, size=(cells + 4, cells + 4))
        coords = (t * cells + 1.5).T
        out += persistence ** o * ndimage.map_coordinates(lattice, coords, order=3, mode="nearest")
        norm += persistence ** o
    return out / norm


def fractal(rings=145, a=30.0, b=22.5, relief=8.0, seed=7):
    """60 m x 45 m terrain with about ``relief`` metres of peak-to-peak noise."""
    xy, f = _ellipse(rings, a, b)
    n = value_noise(xy, seed=seed, extent=([-a, -b], [a, b]))
    span = n.max() - n.min()
    z = relief * (n - n.min()) / (span if span > 0 else 1.0)
    return TriMesh(np.column_stack([xy, z]), f)


SCENARIOS = {
    "plate": plate,
    "wave": wave,
    "bend": bend,
    "fractal": fractal,
}


def make_scenario(name, **kwargs):
    """Build a named scenario mesh; ``name`` may carry the ``scenario:`` prefix."""
    if name.startswith(SCENARIO_PREFIX):
        name = name[len(SCENARIO_PREFIX):]
    try:
        fn = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return fn(**kwargs)
