"""
test_dimension.py

This module defines unit tests for the dimension.py module.
"""

import numpy as np
import pytest
from carpet_lab.config import Preset
from carpet_lab.dimension import assouad_estimate
from carpet_lab.dimension import assouad_schedule
from carpet_lab.dimension import box_count
from carpet_lab.dimension import cube_level
from carpet_lab.dimension import dyadic_cells
from carpet_lab.dimension import microset_dimension_gap
from carpet_lab.dimension import microset_search
from carpet_lab.dimension import minkowski_estimate
from carpet_lab.dimension import rect_cover
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ResolutionTooCoarseError
from carpet_lab.geometry import PointSet2D
from carpet_lab.ifs_core import validate_carpet


# pylint: disable=redefined-outer-name
@pytest.fixture
def square():
    """Returns the validated unit_square preset carpet."""

    return validate_carpet(Preset.named('unit_square').ifs.maps)


@pytest.fixture
def segment():
    """Returns the validated unit_segment preset carpet."""

    return validate_carpet(Preset.named('unit_segment').ifs.maps)


@pytest.fixture
def staggered():
    """Returns the validated staggered_columns preset carpet."""

    return validate_carpet(Preset.named('staggered_columns').ifs.maps)


def test_dyadic_cells_of_the_square(square):
    """Test that every cube of the unit square is occupied, at every coarsening."""

    cells = dyadic_cells(square, 3)

    assert cells.count().count == 64
    assert cells.count().adjusted == 64
    assert cells.coarsen(1).count().count == 4
    assert cells.cells().shape == (64, 2)
    with pytest.raises(ValueError):
        cells.coarsen(4)


def test_raw_counts_bound_adjusted_counts(staggered):
    """Test that raw counts are never below adjusted counts."""

    for level in (2, 4):
        count = dyadic_cells(staggered, level).count()
        assert count.adjusted <= count.count


def test_box_count(staggered):
    """Test counting of point sets and rectangle covers."""

    sample = PointSet2D([[0.1, 0.1], [0.9, 0.9], [0.95, 0.95]])
    assert box_count(sample, 1).count == 2

    cover = rect_cover(staggered, 5)
    assert box_count(cover, 1).count == 4

    with pytest.raises(ResolutionTooCoarseError):
        box_count(PointSet2D([[0.1, 0.1]], resolution=0.2), 1)


def test_minkowski_estimate(square, segment):
    """Test the box-counting slope of the square and of the segment."""

    assert minkowski_estimate(square, (2, 5)).value == pytest.approx(2.0)
    assert minkowski_estimate(segment, (2, 6)).value == pytest.approx(1.0)

    row = minkowski_estimate(segment, (2, 4)).to_row()
    assert row['method'] == 'minkowski'
    assert (row['level_lo'], row['level_hi']) == (2, 4)
    with pytest.raises(ValueError):
        minkowski_estimate(segment, (3, 3))


def test_assouad_estimate(square, segment):
    """Test local covering ratios of the square and of the segment."""

    assert cube_level(1 / 256) == 7

    segment_estimate = assouad_estimate(segment, [((0.5, 0.0), 0.25, 1 / 256)])
    assert 1.0 <= segment_estimate.value <= 1.02

    square_estimate = assouad_estimate(square, [((0.5, 0.5), 0.25, 1 / 256)])
    assert 1.9 <= square_estimate.value <= 2.05

    with pytest.raises(PreconditionError):
        assouad_estimate(square, [])
    with pytest.raises(PreconditionError):
        assouad_estimate(square, [((0.5, 0.5), 0.25, 0.1)])


def test_assouad_schedule(square):
    """Test reproducible schedules of balls centred on the carpet."""

    schedule = assouad_schedule(square, 4, seed=1)

    assert schedule == assouad_schedule(square, 4, seed=1)
    assert len(schedule) == 4
    for center, big, small in schedule:
        assert big / small == pytest.approx(128)
        assert 0 <= center[0] <= 1 and 0 <= center[1] <= 1


def test_microset_search(square):
    """Test that ties keep the whole square as the best window."""

    microset = microset_search(square, 2, 1)

    assert microset.window_depth == 0
    assert microset.window_address == (0, 0)
    assert microset.count.count == 16
    assert microset.counts == ((1, 4), (2, 16))
    assert microset.to_json() == {
        'window_depth': 0,
        'window_address': [0, 0],
        'lambda': 1,
        'z': [0, 0],
        'counts': [[1, 4], [2, 16]]
    }


def test_microset_dimension_gap(square):
    """Test the microset slope against the Assouad estimate of the square."""

    gap = microset_dimension_gap(square, (2, 4), [((0.5, 0.5), 0.25, 1 / 256)], window_budget=1)

    assert gap.microset_slope == pytest.approx(2.0)
    assert gap.passed
    assert np.isfinite(gap.gap)


@pytest.fixture
def cantor():
    """Returns the validated cantor_product preset carpet."""

    return validate_carpet(Preset.named('cantor_product').ifs.maps)


def test_minkowski_two_point_slopes(staggered):
    """Test that the extreme slopes bracket the fitted slope."""

    estimate = minkowski_estimate(staggered, (3, 8))

    assert estimate.lower_slope <= estimate.value <= estimate.upper_slope
    assert 1.0 < estimate.value < 2.0


def test_assouad_cube_samples(staggered):
    """Test that cube samples lift the Assouad estimate above the upper Minkowski slope."""

    section = Preset.named('staggered_columns').dimension
    schedule = assouad_schedule(staggered, section.assouad_samples, section.seed)
    minkowski = minkowski_estimate(staggered, section.levels)

    estimate = assouad_estimate(staggered, schedule, section.levels)

    assert estimate.value >= minkowski.upper_slope - 0.05
    assert estimate.value >= assouad_estimate(staggered, schedule).value
    assert estimate.samples > len(schedule)
    assert estimate.level_range[1] == section.levels[1]

    cube_only = assouad_estimate(staggered, [], (3, 6))
    assert cube_only.value >= minkowski_estimate(staggered, (3, 6)).upper_slope - 0.05
    with pytest.raises(PreconditionError):
        assouad_estimate(staggered, [], (3, 4))


@pytest.mark.parametrize('preset', ['unit_segment', 'unit_square', 'staggered_columns'])
def test_dimension_orderings(preset):
    """Test lower <= upper Minkowski slope <= Assouad estimate over levels 3..9."""

    spec = validate_carpet(Preset.named(preset).ifs.maps)
    schedule = Preset.named(preset).dimension.schedule or assouad_schedule(spec, 8)

    minkowski = minkowski_estimate(spec, (3, 9))
    assouad = assouad_estimate(spec, schedule, (3, 9))

    assert minkowski.lower_slope <= minkowski.upper_slope <= assouad.value + 0.05
    if preset == 'unit_segment':
        assert abs(minkowski.value - 1.0) < 0.1
        assert abs(assouad.value - 1.0) < 0.1
    if preset == 'unit_square':
        assert abs(minkowski.value - 2.0) < 0.05
        assert abs(assouad.value - 2.0) < 0.05


def test_microset_search_budget(staggered):
    """Test that the best count never drops as the window budget grows."""

    finest = dyadic_cells(staggered, 9)
    counts = [microset_search(staggered, 3, budget, finest).count.count for budget in (0, 2, 4, 6)]

    assert counts == sorted(counts)
    assert counts[0] == finest.coarsen(3).count().count


def test_microset_search_deep_windows(staggered):
    """Test windows whose cubes lie below the globally counted level."""

    microset = microset_search(staggered, 7, 6)

    assert microset.count.count >= microset_search(staggered, 7, 2).count.count
    assert microset.counts[-1] == (7, microset.count.count)
    assert [n for n, _ in microset.counts] == list(range(1, 8))
    assert all(a <= b for (_, a), (_, b) in zip(microset.counts, microset.counts[1:]))


def test_microset_dimension_gap_staggered(staggered):
    """Test the microset slope against the Assouad estimate of the staggered carpet."""

    section = Preset.named('staggered_columns').dimension
    schedule = assouad_schedule(staggered, section.assouad_samples, section.seed)

    gap = microset_dimension_gap(staggered, section.microset_levels, schedule,
                                 section.window_budget, assouad_levels=section.levels)

    assert gap.passed
    assert gap.assouad >= minkowski_estimate(staggered, section.levels).upper_slope - 0.05
    assert [n for n, _ in gap.counts] == [3, 4, 5, 6, 7]


def test_microset_dimension_gap_cantor(cantor):
    """Test the microset slope against the cube samples of the Cantor product."""

    section = Preset.named('cantor_product').dimension

    gap = microset_dimension_gap(cantor, section.microset_levels, [], section.window_budget,
                                 assouad_levels=section.levels)

    assert gap.passed
    assert gap.microset_slope >= gap.assouad - 1e-9
