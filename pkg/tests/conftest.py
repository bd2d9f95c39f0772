import numpy as np
import pytest

from sphfsi.geometry import Rect
from sphfsi.kernels import KernelSpec
from sphfsi.particles import BodyKind, make_system


@pytest.fixture
def unit_lattice():
    """30x30 unit-spacing fluid lattice with h = 1.3."""
    system = make_system(Rect(0.0, 0.0, 30.0, 30.0), 1.0, 1000.0, BodyKind.FLUID)
    return system, KernelSpec(h=1.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)
