import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from meshrmp.mesh import TriMesh
from meshrmp.mesh.shapes import grid_square, hemisphere, hex_disc

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def sinusoid_disc(rings=10, amp=0.3):
    v2, f = hex_disc(rings)
    z = amp * np.sin(3 * v2[:, 0]) * np.cos(2 * v2[:, 1])
    return TriMesh(np.column_stack([v2, z]), f)


@pytest.fixture(scope="session")
def unit_square():
    return TriMesh([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], [[0, 1, 2], [0, 2, 3]])


@pytest.fixture(scope="session")
def grid10():
    return grid_square(10, 1.0)


@pytest.fixture(scope="session")
def hemi():
    return hemisphere(rings=10, jitter=0.3, seed=1)


@pytest.fixture(scope="session")
def wavy():
    return sinusoid_disc()


@pytest.fixture(scope="session")
def test_meshes(grid10, hemi, wavy):
    """Representative disc meshes: flat grid, hemisphere, sinusoidal disc."""
    return {"grid": grid10, "hemisphere": hemi, "sinusoid": wavy}


@pytest.fixture(scope="session")
def pairs(test_meshes):
    from meshrmp.manifold import ManifoldPair
    from meshrmp.parametrization import flatten

    return {k: ManifoldPair(m, flatten(m)) for k, m in test_meshes.items()}


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)
