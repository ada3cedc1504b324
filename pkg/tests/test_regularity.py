"""
test_regularity.py

This module defines unit tests for the regularity.py module.
"""

import math
import pytest
from carpet_lab.config import Preset
from carpet_lab.errors import EmptyInputError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ResolutionTooCoarseError
from carpet_lab.ifs_core import validate_carpet
from carpet_lab.intervals import IntervalUnion1D
from carpet_lab.regularity import Estimate
from carpet_lab.regularity import RegularityReport
from carpet_lab.regularity import abscissa_samples
from carpet_lab.regularity import hole_fraction
from carpet_lab.regularity import porosity_estimate
from carpet_lab.regularity import required_perfectness
from carpet_lab.regularity import slice_constants
from carpet_lab.regularity import uniform_perfectness_estimate
from carpet_lab.regularity import verify_slice_regularity


# pylint: disable=redefined-outer-name
@pytest.fixture
def slice_union():
    """Returns the depth-1 slice [0, 0.2] U [0.55, 0.75]."""

    return IntervalUnion1D.from_intervals([(0.0, 0.2), (0.55, 0.75)])


@pytest.fixture
def staggered():
    """Returns the validated staggered_columns preset carpet."""

    return validate_carpet(Preset.named('staggered_columns').ifs.maps)


def test_slice_constants():
    """Test the porosity and perfectness constants."""

    constants = slice_constants(0.05, 0.5, 0.2)

    assert constants.k == 5
    assert constants.porosity_bound == pytest.approx(0.0125)
    assert constants.perfectness_bound == pytest.approx(0.2 ** -6 / 0.05)
    with pytest.raises(PreconditionError):
        slice_constants(0.0, 0.5, 0.2)


def test_hole_fraction(slice_union):
    """Test the largest hole inside a ball."""

    assert hole_fraction(slice_union, 0.375, 0.375) == pytest.approx(0.175 / 0.375)
    assert hole_fraction(slice_union, 0.1, 0.05) == 0.0


def test_required_perfectness(slice_union):
    """Test the least annulus ratio meeting the set."""

    assert required_perfectness(slice_union, 0.1, 0.2) == pytest.approx(2.0)
    assert required_perfectness(slice_union, 0.375, 1.0) is None

    points = IntervalUnion1D.from_intervals([(0.0, 0.0), (1.0, 1.0)])
    assert required_perfectness(points, 0.0, 0.5) == math.inf


def test_estimates_on_a_segment():
    """Test that a segment is not porous and is perfect with constant one."""

    segment = IntervalUnion1D.from_intervals([(0.0, 1.0)])

    porosity = porosity_estimate(segment, (0.1, 0.2), grid=4, centers=[0.5])
    perfectness = uniform_perfectness_estimate(segment, (0.1, 0.2), grid=4, centers=[0.5])

    assert porosity.value == 0.0
    assert porosity.samples == 4
    assert perfectness.value == pytest.approx(1.0)


def test_estimate_errors(slice_union):
    """Test rejection of empty sets and too coarse covers."""

    with pytest.raises(EmptyInputError):
        porosity_estimate(IntervalUnion1D(), (0.1, 0.2))
    with pytest.raises(ResolutionTooCoarseError):
        uniform_perfectness_estimate(slice_union, (0.01, 0.2), resolution=0.05)


def test_regularity_report_slack():
    """Test that the slack is added to both bounds, not scaled with the perfectness bound."""

    constants = slice_constants(0.05, 0.5, 0.2)
    bound = constants.perfectness_bound

    def report(porosity, perfectness):
        return RegularityReport(x=0.5,
                                porosity=Estimate(porosity, 0.5, 0.1, 1),
                                perfectness=Estimate(perfectness, 0.5, 0.1, 1),
                                scale_range=(0.01, 0.1),
                                constants=constants,
                                slack=0.01)

    assert report(0.0125 - 0.005, bound + 0.005).passed
    assert not report(0.0125 - 0.02, 1.0).porosity_ok
    assert not report(0.0125, bound + 0.5).perfectness_ok
    assert not report(0.0125, bound * 1.005).passed


def test_abscissa_samples(staggered):
    """Test evenly spaced abscissae inside the projection."""

    samples = abscissa_samples(staggered, 4)

    assert samples == pytest.approx([0.125, 0.375, 0.625, 0.875])
    with pytest.raises(ValueError):
        abscissa_samples(staggered, 0)


def test_verify_slice_regularity(staggered):
    """Test porosity and uniform perfectness of staggered slices."""

    reports = verify_slice_regularity(staggered, [0.125, 0.375, 0.625], depth=6, grid=4)

    assert [r.x for r in reports] == [0.125, 0.375, 0.625]
    for report in reports:
        assert report.porosity.value > 0
        assert report.perfectness.value >= 1
        assert report.passed
        assert report.to_row()['pass'] == 'true'


def test_verify_slice_regularity_needs_separation():
    """Test that an unseparated carpet is refused."""

    square = validate_carpet(Preset.named('unit_square').ifs.maps)

    with pytest.raises(PreconditionError):
        verify_slice_regularity(square, [0.5])


def test_verify_slice_regularity_preset(staggered):
    """Test the preset slices of the staggered carpet over the default scale window."""

    section = Preset.named('staggered_columns').slice
    alpha_bar = float(staggered.alpha_bar)

    reports = verify_slice_regularity(staggered, abscissa_samples(staggered, section.count),
                                      depth=section.depth, grid=section.grid)

    assert len(reports) == 20
    for report in reports:
        assert report.scale_range == pytest.approx((alpha_bar ** 6, alpha_bar ** 2))
        assert report.passed
