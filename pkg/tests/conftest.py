from __future__ import annotations

import numpy as np
import pytest

from finsler import Ellipsoid, LSEPolytope, box
from finsler.verification import skew_ellipsoid, smooth_polytope


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_disk():
    return Ellipsoid.ball([0.0, 0.0], 1.0)


@pytest.fixture
def ellipse():
    return skew_ellipsoid(2)


@pytest.fixture
def lse2():
    return smooth_polytope(2)


@pytest.fixture
def square():
    return box([-1.0, -1.0], [1.0, 1.0])


@pytest.fixture
def smooth_square():
    return LSEPolytope(np.vstack([np.eye(2), -np.eye(2)]), np.ones(4))
