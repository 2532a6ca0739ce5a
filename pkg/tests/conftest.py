"""
Pytest configuration and shared fixtures for tvcone tests
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add src to path for development testing
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from tvcone.optics import build_support_mask, degrade, missing_cone_mask
from tvcone.phantoms import default_bead, generate
from tvcone.types import GridSpec, OpticsGeometry
from tvcone.volgrid import Volume3


@pytest.fixture
def rng():
    """Seeded generator so random test data is reproducible."""
    return np.random.default_rng(20240501)


@pytest.fixture
def tiny_grid():
    """4^3 grid for dense-matrix comparisons."""
    return GridSpec.cube(4, 1.0)


@pytest.fixture
def small_grid():
    """8^3 unit-pitch grid."""
    return GridSpec.cube(8, 1.0)


@pytest.fixture
def optics():
    """The NA 1.2 / 1.2 water-immersion system at 532 nm."""
    return OpticsGeometry()


@pytest.fixture
def bead32_grid():
    """Smallest grid that holds the 2 um bead and the full pass band."""
    return GridSpec(nx=32, ny=32, nz=32, dx=0.1, dy=0.1, dz=0.2)


@pytest.fixture
def bead64_grid():
    return GridSpec(nx=64, ny=64, nz=64, dx=0.1, dy=0.1, dz=0.2)


@pytest.fixture
def bead32(bead32_grid, optics):
    """(truth, mask, spectrum, raw) for the bead on the 32^3 grid."""
    truth = generate(default_bead(), bead32_grid)
    mask = build_support_mask(optics, bead32_grid)
    spectrum, raw = degrade(truth, mask)
    return truth, mask, spectrum, raw


@pytest.fixture(scope="session")
def bead64():
    """(truth, mask, spectrum, raw) for the bead on the 64^3 grid."""
    grid = GridSpec(nx=64, ny=64, nz=64, dx=0.1, dy=0.1, dz=0.2)
    truth = generate(default_bead(), grid)
    mask = build_support_mask(OpticsGeometry(), grid)
    spectrum, raw = degrade(truth, mask)
    return truth, mask, spectrum, raw


@pytest.fixture
def cone_problem(small_grid):
    """(truth, mask, spectrum) for a non-negative block behind a 30 degree missing cone."""
    data = np.zeros(small_grid.shape)
    data[2:5, 2:5, 2:6] = 1.0
    data[3, 3, 3] = 1.5
    truth = Volume3(small_grid, data)
    mask = missing_cone_mask(small_grid, 30.0)
    spectrum, _ = degrade(truth, mask)
    return truth, mask, spectrum
