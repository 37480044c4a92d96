import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cantilever.dynamics.forces import spring_forces
from cantilever.exceptions import LatticeError
from cantilever.lattice.builder import TriangularLatticeBuilder, build_lattice
from cantilever.lattice.listing import dump_listing
from cantilever.lattice.types import Lattice, LatticeConfig, PointKind


def test_reference_geometry_point_counts():
    lattice = build_lattice(LatticeConfig(length=350.0, width=1.0, points_outer_row=607))

    assert lattice.n_points == 1822
    assert np.count_nonzero(lattice.rows == 1) == 608
    assert len(lattice.springs) == 7 * 607 - 2


def test_minimal_lattice_is_unstressed():
    lattice = build_lattice(LatticeConfig(length=350.0, width=1.0, points_outer_row=3))

    assert lattice.n_points == 10
    assert_allclose(spring_forces(lattice, lattice.rest_positions), 0.0, atol=1e-12)


def test_rows_are_placed_on_faces_and_middle(small_lattice: Lattice, small_config: LatticeConfig):
    z = small_lattice.rest_positions[:, 1]
    h = small_config.spacing

    assert_allclose(np.unique(z), [-0.5, 0.0, 0.5])
    middle = small_lattice.rest_positions[small_lattice.rows == 1, 0]
    assert_allclose(middle[[0, -1]], [-h / 2, small_config.length + h / 2])
    assert_allclose(np.diff(middle), h)


def test_rest_lengths_match_distances(small_lattice: Lattice):
    ends = small_lattice.spring_endpoints
    d = small_lattice.rest_positions[ends[:, 1]] - small_lattice.rest_positions[ends[:, 0]]

    assert_allclose(small_lattice.rest_lengths, np.hypot(d[:, 0], d[:, 1]))


def test_graph_has_no_duplicates_and_expected_degrees(small_lattice: Lattice):
    ends = small_lattice.spring_endpoints
    degrees = small_lattice.degrees()
    middle = np.flatnonzero(small_lattice.rows == 1)

    assert np.all(ends[:, 0] != ends[:, 1])
    assert len({tuple(sorted(e)) for e in ends.tolist()}) == len(ends)
    assert np.all(degrees[small_lattice.ids_of(PointKind.FREE)] >= 2)
    assert_array_equal(degrees[middle[1:-1]], 6)


def test_leftmost_point_of_each_row_is_anchored(small_lattice: Lattice):
    anchored = small_lattice.ids_of(PointKind.ANCHORED)

    assert anchored.size == 3
    for row in range(3):
        in_row = np.flatnonzero(small_lattice.rows == row)
        assert in_row[np.argmin(small_lattice.rest_positions[in_row, 0])] in anchored


def test_two_anchor_columns():
    lattice = build_lattice(LatticeConfig(length=40.0, width=1.0, points_outer_row=21, anchor_columns=2))

    assert lattice.ids_of(PointKind.ANCHORED).size == 6


def test_five_row_variant():
    config = LatticeConfig(length=40.0, width=1.0, points_outer_row=21, rows=5)
    lattice = build_lattice(config)

    assert lattice.n_points == 5 * 21 + 2
    assert_allclose(np.unique(lattice.rest_positions[:, 1]), [-0.5, -0.25, 0.0, 0.25, 0.5])
    assert_allclose(spring_forces(lattice, lattice.rest_positions), 0.0, atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rows": 4},
        {"points_outer_row": 2},
        {"length": 0.5},
        {"point_mass": 0.0},
        {"anchor_columns": 3},
    ],
)
def test_invalid_configs_are_rejected(kwargs):
    base = {"length": 40.0, "width": 1.0, "points_outer_row": 21}
    with pytest.raises(LatticeError):
        LatticeConfig(**(base | kwargs))


def test_coarse_lattice_is_reported(caplog):
    with caplog.at_level("WARNING"):
        TriangularLatticeBuilder().build(LatticeConfig(length=40.0, width=1.0, points_outer_row=5))

    assert "too coarse" in caplog.text


def test_construction_is_deterministic(small_config: LatticeConfig):
    assert dump_listing(build_lattice(small_config)) == dump_listing(build_lattice(small_config))
