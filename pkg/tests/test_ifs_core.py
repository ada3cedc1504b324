"""
test_ifs_core.py

This module defines unit tests for the ifs_core.py module.
"""

import math
from fractions import Fraction
from io import StringIO
import numpy as np
import pytest
from carpet_lab.config import IfsDocument
from carpet_lab.errors import DegenerateMapError
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.errors import EmptySystemError
from carpet_lab.errors import InputParseError
from carpet_lab.errors import NonContractiveError
from carpet_lab.errors import SymbolOutOfRangeError
from carpet_lab.ifs_core import AffineMap2D
from carpet_lab.ifs_core import CertifiedSSC
from carpet_lab.ifs_core import Inconclusive
from carpet_lab.ifs_core import InfiniteWord
from carpet_lab.ifs_core import Rect
from carpet_lab.ifs_core import Word
from carpet_lab.ifs_core import check_budget
from carpet_lab.ifs_core import compose
from carpet_lab.ifs_core import compute_bounding_rect
from carpet_lab.ifs_core import cylinder_rect
from carpet_lab.ifs_core import level_rects
from carpet_lab.ifs_core import level_words
from carpet_lab.ifs_core import local_cylinders
from carpet_lab.ifs_core import normalize
from carpet_lab.ifs_core import separation_delta
from carpet_lab.ifs_core import ssc_check
from carpet_lab.ifs_core import to_exact
from carpet_lab.ifs_core import unit_frame
from carpet_lab.ifs_core import validate_carpet
from carpet_lab.ifs_core import word_at
from carpet_lab.ifs_core import word_budget


# pylint: disable=redefined-outer-name
@pytest.fixture
def staggered_json():
    """Returns a JSON string with two staggered columns of flat rectangles."""

    return '''{
        "maps": [
            {"a1": 0.5, "a2": 0.2, "b1": 0, "b2": 0},
            {"a1": 0.5, "a2": 0.2, "b1": 0.5, "b2": 0.25},
            {"a1": 0.5, "a2": 0.2, "b1": 0, "b2": 0.55},
            {"a1": 0.5, "a2": 0.2, "b1": 0.5, "b2": 0.8}
        ]
    }'''


@pytest.fixture
def reflected_json():
    """Returns a JSON string with a reflected four-map carpet."""

    return '''{
        "maps": [
            {"a1": "-3/5", "a2": "1/3", "b1": "3/5", "b2": 0},
            {"a1": "3/5", "a2": "1/3", "b1": 0, "b2": "2/5"},
            {"a1": "-1/5", "a2": "1/6", "b1": 1, "b2": 0},
            {"a1": "1/5", "a2": "1/6", "b1": "4/5", "b2": "2/5"}
        ]
    }'''


@pytest.fixture
def staggered(staggered_json):
    """Returns the validated staggered carpet."""

    document = IfsDocument()
    document.load(StringIO(staggered_json))
    return validate_carpet(document.maps)


@pytest.fixture
def reflected(reflected_json):
    """Returns the validated reflected carpet."""

    document = IfsDocument()
    document.load(StringIO(reflected_json))
    return validate_carpet(document.maps)


def test_to_exact():
    """Test conversion of input numbers to rationals."""

    assert to_exact(0.2) == Fraction(1, 5)
    assert to_exact('3/5') == Fraction(3, 5)
    assert to_exact(2) == Fraction(2)
    with pytest.raises(InputParseError):
        to_exact(True)
    with pytest.raises(InputParseError):
        to_exact('three fifths')
    with pytest.raises(InputParseError):
        to_exact(float('nan'))


def test_word_budget(monkeypatch):
    """Test the word budget read from the environment."""

    monkeypatch.setenv('CARPET_LAB_BUDGET', '64')
    assert word_budget() == 64
    check_budget(4, 3)
    with pytest.raises(DepthBudgetExceededError):
        check_budget(4, 4)

    monkeypatch.setenv('CARPET_LAB_BUDGET', 'many')
    with pytest.raises(InputParseError):
        word_budget()

    monkeypatch.setenv('CARPET_LAB_BUDGET', '0')
    with pytest.raises(InputParseError):
        word_budget()


def test_affine_map():
    """Test composition and fixed points of diagonal affine maps."""

    outer = AffineMap2D(Fraction(1, 2), Fraction(1, 5), Fraction(1, 2), Fraction(1, 4))
    inner = AffineMap2D(Fraction(-3, 5), Fraction(1, 3), Fraction(3, 5), 0)

    composed = outer.compose(inner)
    assert composed(0, 0) == outer(*inner(0, 0))
    assert composed(1, 1) == outer(*inner(1, 1))
    assert inner.fixed_point() == (Fraction(3, 8), Fraction(0))
    assert inner.alpha1 == Fraction(3, 5)
    assert inner.image_x(0, 1) == (Fraction(0), Fraction(3, 5))


def test_rect_distance():
    """Test exact and diagonal distances between rectangles."""

    first = Rect(Fraction(0), Fraction(1, 2), Fraction(0), Fraction(1, 5))
    second = Rect(Fraction(1, 2), Fraction(1), Fraction(1, 4), Fraction(9, 20))
    third = Rect(Fraction(1), Fraction(2), Fraction(1), Fraction(2))

    assert first.distance(second) == Fraction(1, 20)
    assert first.distance(third) == pytest.approx(np.hypot(0.5, 0.8))
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 1)


def test_words():
    """Test finite and eventually periodic words."""

    assert [str(w) for w in level_words(2, 2)] == ['11', '12', '21', '22']
    assert word_at(4, 2, 5) == Word((2, 2))
    assert Word((1, 2, 3)).prefix == Word((1, 2))

    word = InfiniteWord((2,), (1, 3))
    assert str(word) == '2(13)*'
    assert word.truncate(5) == Word((2, 1, 3, 1, 3))
    with pytest.raises(SymbolOutOfRangeError):
        Word((1, 5)).check(4)


def test_validate_carpet(staggered):
    """Test the certified constants of the staggered carpet."""

    assert staggered.n_maps == 4
    assert staggered.q == Rect(Fraction(0), Fraction(1), Fraction(0), Fraction(1))
    assert staggered.q_error == 0
    assert staggered.alpha_bar == Fraction(1, 2)
    assert staggered.alpha_under == Fraction(1, 5)
    assert staggered.beta == Fraction(2, 5)
    assert staggered.delta_lo == Fraction(1, 20)
    assert staggered.delta_hi >= staggered.delta_lo
    assert staggered.ssc_status == CertifiedSSC(1, Fraction(1, 20))


def test_validate_carpet_errors():
    """Test rejection of invalid systems."""

    half = AffineMap2D(Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(EmptySystemError):
        validate_carpet([half])
    with pytest.raises(DegenerateMapError):
        validate_carpet([half, AffineMap2D(0, Fraction(1, 2))])
    with pytest.raises(NonContractiveError):
        validate_carpet([half, AffineMap2D(1, Fraction(1, 2))])


def test_bounding_rect_with_reflections(reflected):
    """Test the exactly snapped bounding rectangle of a reflected carpet."""

    assert reflected.q == Rect(Fraction(0), Fraction(1), Fraction(0), Fraction(3, 5))
    assert reflected.q_error == 0

    bounding = compute_bounding_rect(reflected)
    assert bounding.exact
    assert bounding.error == 0
    assert compute_bounding_rect(reflected, tolerance=1e-15).rect == bounding.rect == reflected.q


def test_coding_point(staggered):
    """Test the exact point of an eventually periodic word."""

    assert InfiniteWord((2,), (1,)).point(staggered) == (Fraction(1, 2), Fraction(1, 4))
    assert compose(staggered, Word((2, 1)))(0, 0) == (Fraction(1, 2), Fraction(1, 4))


def test_level_rects_order(staggered):
    """Test that float rows follow the lexicographic word order."""

    rows = level_rects(staggered, 2)
    assert rows.shape == (16, 4)
    for index in (0, 5, 11, 15):
        expected = cylinder_rect(staggered, word_at(4, 2, index)).as_floats()
        assert rows[index] == pytest.approx(expected)


def test_local_cylinders(staggered):
    """Test the pruned descent into a small ball."""

    maps = local_cylinders(staggered, (0.0, 0.0), 0.01, 2)
    assert len(maps) == 1
    assert maps[0] == pytest.approx([0.25, 0.04, 0.0, 0.0])


def test_separation(staggered):
    """Test separation bounds and the strong separation certificate."""

    bounds = separation_delta(staggered, 2)
    assert bounds.lower == Fraction(1, 20)
    assert bounds.upper >= bounds.lower

    square = validate_carpet([AffineMap2D(Fraction(1, 2), Fraction(1, 2), bx, by)
                              for bx in (0, Fraction(1, 2)) for by in (0, Fraction(1, 2))])
    assert ssc_check(square, 2) == Inconclusive(2)
    assert not square.ssc_certified


def test_separation_diagonal_gap():
    """Test that a gap along both axes gives a lower bound strictly below the true distance."""

    diagonal = validate_carpet([AffineMap2D(Fraction(2, 5), Fraction(3, 10), 0, 0),
                                AffineMap2D(Fraction(2, 5), Fraction(3, 10), Fraction(3, 5), Fraction(7, 10))])

    bounds = separation_delta(diagonal, 1)
    assert isinstance(bounds.lower, float)
    assert math.sqrt(0.2) - 4e-12 < bounds.lower < math.sqrt(0.2) - 1e-12
    assert diagonal.ssc_certified


def test_normalize(staggered):
    """Test normalization to diameter one."""

    normalized = normalize(staggered)
    assert normalized.diam_q == pytest.approx(1.0)
    assert normalized.q.xmin == 0
    assert normalized.q.ymin == 0
    assert float(normalized.delta_lo) == pytest.approx(0.05 / np.sqrt(2))
    assert unit_frame(staggered) is staggered
