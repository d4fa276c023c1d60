import math

import numpy as np
import pytest
from hypothesis import settings

from chaincsg.geometry import rotate, scale, translate
from chaincsg.primitives import cube

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

THREE_CUBE_ASSEMBLY = """\
(struct
  (solid A (cube))
  (t .3 .4 .25) (r pi/5 0 0) (r 0 0 pi/12)
  (solid B (cube))
  (t -.2 .4 -.2) (r 0 pi/5 0) (r 0 pi/12 0)
  (solid C (cube)))
"""

# Data 1: 1-based vertex lists of a small 2-complex with 12 vertices
DATA1_V = np.array([[0.0, 1.5, 3.0, 1.0, 1.5, 2.0, 1.0, 1.5, 2.0, 0.0, 1.5, 3.0],
                    [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0]]).T
DATA1_EV = [[1, 2], [2, 3], [4, 5], [5, 6], [7, 8], [8, 9], [10, 11], [11, 12],
            [1, 10], [4, 7], [6, 9], [3, 12], [2, 5], [8, 11]]
DATA1_FV = [[1, 2, 4, 5, 7, 8, 10, 11], [2, 3, 5, 6, 8, 9, 11, 12], [4, 5, 6, 7, 8, 9]]


def three_cube_transforms():
    M1 = translate(.3, .4, .25) @ rotate(math.pi / 5, 0, 0) @ rotate(0, 0, math.pi / 12)
    M2 = M1 @ translate(-.2, .4, -.2) @ rotate(0, math.pi / 5, 0) @ rotate(0, math.pi / 12, 0)
    return [None, M1, M2]


def three_cube_models():
    c = cube()
    return [c if M is None else c.transformed(M) for M in three_cube_transforms()]


def random_box_scene(seed, lo=2, hi=4):
    """2-4 boxes, about half of them rotated; returns (models, maps)."""
    rng = np.random.default_rng(seed)
    models, maps = [], []
    for _ in range(int(rng.integers(lo, hi + 1))):
        R = rotate(*rng.uniform(0, math.pi, 3)) if rng.random() < 0.5 else rotate(0, 0, 0)
        M = translate(*rng.uniform(0, 1, 3)) @ R @ scale(*rng.uniform(0.5, 1.5, 3))
        models.append(cube().transformed(M))
        maps.append(M)
    return models, maps


@pytest.fixture(scope="session")
def three_cubes():
    from chaincsg.pipeline import arrange_models
    return arrange_models(list(zip("ABC", three_cube_models())))


# --- acceptance summary -----------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
