import numpy as np
import pytest

from sphfsi.geometry import Disk, Rect, lattice_fill


def test_exact_rectangle_counts():
    # 1.0 x 2.0 region at dp = 0.0125 tiles to 80 x 160 sites
    pos = lattice_fill(Rect(0.0, 0.0, 1.0, 2.0), 0.0125)
    assert pos.shape[0] == 80 * 160


def test_thin_plate_count():
    pos = lattice_fill(Rect(0.0, 0.0, 1.0, 0.05), 0.00625)
    assert pos.shape[0] == 160 * 8


def test_single_cell_region():
    pos = lattice_fill(Rect(0.0, 0.0, 0.01, 0.01), 0.01)
    assert pos.shape == (1, 2)
    np.testing.assert_allclose(pos[0], [0.005, 0.005])


def test_count_within_one_row_of_area_ratio():
    region = Rect(0.0, 0.0, 0.73, 0.41)
    dp = 0.02
    pos = lattice_fill(region, dp)
    expected = 0.73 * 0.41 / dp**2
    rows = max(0.73, 0.41) / dp
    assert abs(pos.shape[0] - expected) <= rows + 1


def test_disk_and_difference():
    region = Rect(0.0, 0.0, 2.0, 2.0) - Disk(1.0, 1.0, 0.5)
    pos = lattice_fill(region, 0.05)
    r = np.hypot(pos[:, 0] - 1.0, pos[:, 1] - 1.0)
    assert np.all(r >= 0.5)
    # area check within a couple of percent
    expected = (4.0 - np.pi * 0.25) / 0.05**2
    assert abs(pos.shape[0] - expected) / expected < 0.02


def test_union():
    region = Rect(0.0, 0.0, 1.0, 1.0) | Rect(2.0, 0.0, 3.0, 1.0)
    pos = lattice_fill(region, 0.1)
    assert pos.shape[0] == 200


def test_degenerate_region_rejected():
    with pytest.raises(ValueError):
        Rect(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        lattice_fill(Rect(0.0, 0.0, 1.0, 1.0), -0.1)
    with pytest.raises(ValueError):
        lattice_fill(Rect(0.0, 0.0, 1.0, 1.0) - Rect(-1.0, -1.0, 2.0, 2.0), 0.1)
