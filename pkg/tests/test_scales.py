"""
test_scales.py

This module defines unit tests for the scales.py module.
"""

import pytest
from carpet_lab.config import Preset
from carpet_lab.errors import EmptyIndexSetError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ScaleOutOfRangeError
from carpet_lab.errors import UndecidableError
from carpet_lab.ifs_core import InfiniteWord
from carpet_lab.ifs_core import normalize
from carpet_lab.ifs_core import validate_carpet
from carpet_lab.scales import ScaleIndex
from carpet_lab.scales import n_lower_star
from carpet_lab.scales import n_of
from carpet_lab.scales import n_star
from carpet_lab.scales import sample_schedule
from carpet_lab.scales import verify_littlethings
from carpet_lab.scales import word_ratio


# pylint: disable=redefined-outer-name
@pytest.fixture
def staggered():
    """Returns the validated staggered_columns preset carpet."""

    return validate_carpet(Preset.named('staggered_columns').ifs.maps)


@pytest.fixture
def normalized(staggered):
    """Returns the staggered carpet normalized to diameter one."""

    return normalize(staggered)


def test_n_star(staggered):
    """Test the least n with alpha_bar^n below t."""

    assert n_star(staggered, 0.3) == 2
    assert n_star(staggered, 0.25) == 3
    with pytest.raises(ScaleOutOfRangeError):
        n_star(staggered, 1)
    with pytest.raises(ScaleOutOfRangeError):
        n_star(staggered, 0)


def test_n_lower_star(staggered):
    """Test the largest n with alpha_under^n delta above t."""

    assert n_lower_star(staggered, 0.001) == 2
    with pytest.raises(EmptyIndexSetError):
        n_lower_star(staggered, 0.01)


def test_n_of_fixed_point(normalized):
    """Test the scale index at the corner fixed point."""

    word = InfiniteWord((), (1,))
    index = n_of(normalized, word, 0.125)

    assert index == ScaleIndex(1, 1, 1)
    assert index.require() == 1
    assert float(word_ratio(normalized, word, 1)) == pytest.approx(0.2)


def test_n_of_out_of_regime(staggered):
    """Test a scale so large that a second first-level image reaches the ball."""

    index = n_of(staggered, InfiniteWord((), (1,)), 0.9)

    assert index.out_of_regime
    assert index.value == 0


def test_undecided_index():
    """Test that an undecided index refuses to produce a value."""

    with pytest.raises(UndecidableError):
        ScaleIndex(None, 2, 4).require()


def test_sample_schedule(normalized):
    """Test reproducible scale schedules with edge cases."""

    first = sample_schedule(normalized, 10, seed=3)
    second = sample_schedule(normalized, 10, seed=3)

    assert first == second
    assert len(first) == 12
    assert len(sample_schedule(normalized, 10, edge_cases=False)) == 10
    assert all(0 < t < 1 for _, t in first)
    with pytest.raises(ScaleOutOfRangeError):
        sample_schedule(normalized, 5, t_range=(0.5, 2.0))


def test_verify_littlethings(normalized):
    """Test the sandwich and ratio bounds on a decided sample."""

    samples = [(InfiniteWord((), (1,)), 0.125)]
    report, = verify_littlethings(normalized, samples)

    assert report.passed
    assert report.n_exact == 1
    assert report.n_lower == 0
    assert report.n_upper == 4
    assert report.ratio == pytest.approx(0.2)
    assert report.to_row()['pass'] == 'true'
    assert report.to_row()['prefix'] == '(1)*'


def test_verify_littlethings_injected_failure(normalized):
    """Test that an inflated separation breaks the ratio bound."""

    samples = [(InfiniteWord((), (1,)), 0.125)]
    report, = verify_littlethings(normalized, samples, delta_scale=100)

    assert not report.passed
    assert report.to_row()['pass'] == 'false'


def test_verify_littlethings_needs_separation():
    """Test that an unseparated carpet is refused."""

    square = validate_carpet(Preset.named('unit_square').ifs.maps)

    with pytest.raises(PreconditionError):
        verify_littlethings(square, [(InfiniteWord((), (1,)), 0.1)])


def test_verify_littlethings_preset_schedule(normalized):
    """Test the bounds on the preset schedule of the staggered carpet."""

    section = Preset.named('staggered_columns').scales
    alpha_bar = float(normalized.alpha_bar)
    assert section.t_range == pytest.approx((alpha_bar ** 8, alpha_bar ** 3))

    samples = sample_schedule(normalized, section.count, section.t_range, section.seed, edge_cases=False)
    reports = verify_littlethings(normalized, samples, section.cert_depth)

    assert len(reports) >= 100
    assert all(report.passed for report in reports if report.certified)
    assert sum(report.certified for report in reports) >= 0.95 * len(reports)
