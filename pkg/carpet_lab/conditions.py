"""
conditions.py

Checkers for the structural conditions of horizontal carpets:

- H1: every map contracts strictly more in the vertical direction than in the horizontal one.
- H2: every vertical line meeting the bounding rectangle meets at least two level-1 images.
- H2': the horizontal projection of the attractor is a single segment.
- H2'': every vertical line meeting the bounding rectangle either misses all level-1 images
  or meets at least two level-2 images.

Level-1 and level-2 sweeps run on exact rational endpoints. The horizontal projection is
an outer approximation from depth-m construction rectangles, so its gaps are certified.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from carpet_lab.errors import UncertifiedHullError
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import EXACT_PAIR_LIMIT
from carpet_lab.ifs_core import check_budget
from carpet_lab.ifs_core import level_maps_exact
from carpet_lab.ifs_core import level_rects
from carpet_lab.intervals import CoverageSegment
from carpet_lab.intervals import IntervalUnion1D
from carpet_lab.intervals import coverage_segments
from carpet_lab.intervals import Number

logger = logging.getLogger('root')

MERGE_TOLERANCE = 1e-12


class Verdict(str, Enum):
    HOLDS = 'holds'
    FAILS = 'fails'
    UNCERTIFIED = 'uncertified'


@dataclass(frozen=True)
class CheckResult:
    """Verdict of one condition with the abscissa ranges where it fails."""

    condition: str
    verdict: Verdict
    witnesses: tuple[tuple[Number, Number], ...] = ()
    certification_depth: int = 1

    def __post_init__(self) -> None:
        if self.verdict is Verdict.FAILS and not self.witnesses:
            raise ValueError(f"{self.condition} fails without a witness")

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS


def _verdict(condition: str, witnesses: list, depth: int = 1) -> CheckResult:
    return CheckResult(condition,
                       Verdict.FAILS if witnesses else Verdict.HOLDS,
                       tuple(witnesses),
                       depth)


def _witness_ranges(segments: list[CoverageSegment], failing) -> list[tuple[Number, Number]]:
    """Merge consecutive failing segments into closed witness ranges."""

    ranges: list[tuple[Number, Number]] = []
    previous_failed = False
    for segment in segments:
        failed = failing(segment)
        if failed and previous_failed:
            ranges[-1] = (ranges[-1][0], segment.hi)
        elif failed:
            ranges.append((segment.lo, segment.hi))
        previous_failed = failed
    return ranges


def _x_images(spec: CarpetSpec, depth: int) -> list[tuple[Number, Number]]:
    return [m.image_x(spec.q.xmin, spec.q.xmax) for m in level_maps_exact(spec, depth)]


def _projection_intervals(spec: CarpetSpec, depth: int) -> tuple[list, Number]:
    """x-projections of the depth-m construction rectangles with a merge tolerance."""

    check_budget(spec.n_maps, depth)
    if spec.n_maps ** depth <= EXACT_PAIR_LIMIT:
        return _x_images(spec, depth), 0
    rects = level_rects(spec, depth)
    return [(float(lo), float(hi)) for lo, hi in rects[:, 0:2]], MERGE_TOLERANCE


def horizontal_projection(spec: CarpetSpec, depth: int) -> tuple[IntervalUnion1D, IntervalUnion1D]:
    """Outer approximation of proj_1(E) at the given depth and its certified gaps.

    The gaps are open intervals of [h, h'] stored by their endpoints.
    """

    intervals, tolerance = _projection_intervals(spec, depth)
    outer = IntervalUnion1D.from_intervals(intervals, tolerance)
    gaps = IntervalUnion1D(tuple(outer.gaps(spec.q.xmin, spec.q.xmax)))
    logger.debug('projection at depth %s: %s components, %s gaps', depth, len(outer), len(gaps))
    return outer, gaps


def image_gap_lines(spec: CarpetSpec, depth: int) -> dict[int, IntervalUnion1D]:
    """Per level-1 image, the certified gaps of its own horizontal projection.

    Vertical lines through these gaps meet the image's hull but miss E.
    """

    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    intervals, tolerance = _projection_intervals(spec, depth)
    per_image = len(intervals) // spec.n_maps
    result = {}
    for index, mapping in enumerate(spec.maps, start=1):
        lo, hi = mapping.image_x(spec.q.xmin, spec.q.xmax)
        own = intervals[(index - 1) * per_image:index * per_image]
        outer = IntervalUnion1D.from_intervals(own, tolerance)
        result[index] = IntervalUnion1D(tuple(outer.gaps(lo, hi)))
    return result


def check_H1(spec: CarpetSpec) -> CheckResult:
    """H1: alpha_1(i) > alpha_2(i) for every map; witnesses are offending indices."""

    witnesses = [(index, index)
                 for index, mapping in enumerate(spec.maps, start=1)
                 if mapping.alpha1 <= mapping.alpha2]
    return _verdict('H1', witnesses)


def check_H2(spec: CarpetSpec, tolerance: float = MERGE_TOLERANCE) -> CheckResult:
    """H2: coverage of [h, h'] by level-1 hull projections is at least two everywhere."""

    if spec.q_error > tolerance:
        raise UncertifiedHullError(
            f"bounding rectangle error {spec.q_error} exceeds the sweep tolerance {tolerance}")
    segments = coverage_segments(_x_images(spec, 1), spec.q.xmin, spec.q.xmax)
    return _verdict('H2', _witness_ranges(segments, lambda s: s.count < 2))


def check_H2prime(spec: CarpetSpec, depth: int) -> CheckResult:
    """H2': no certified projection gaps and level-1 coverage of [h, h'] everywhere."""

    _, gaps = horizontal_projection(spec, depth)
    segments = coverage_segments(_x_images(spec, 1), spec.q.xmin, spec.q.xmax)
    witnesses = list(gaps) + _witness_ranges(segments, lambda s: s.count < 1)
    return _verdict("H2'", sorted(set(witnesses)), depth)


def check_H2doubleprime(spec: CarpetSpec) -> CheckResult:
    """H2'': level-1 coverage is zero or level-2 coverage is at least two, everywhere."""

    first = _x_images(spec, 1)
    second = _x_images(spec, 2)
    cuts = [e for pair in first + second for e in pair]
    c1 = coverage_segments(first, spec.q.xmin, spec.q.xmax, cuts)
    c2 = coverage_segments(second, spec.q.xmin, spec.q.xmax, cuts)
    violations = [CoverageSegment(a.lo, a.hi, int(a.count > 0 and b.count < 2))
                  for a, b in zip(c1, c2)]
    return _verdict("H2''", _witness_ranges(violations, lambda s: s.count == 1), 2)


def check_all(spec: CarpetSpec, depth: int) -> list[CheckResult]:
    """Every condition, in report order."""

    results: list[CheckResult] = [check_H1(spec)]
    try:
        results.append(check_H2(spec))
    except UncertifiedHullError as error:
        logger.info('H2 left uncertified: %s', error)
        results.append(CheckResult('H2', Verdict.UNCERTIFIED))
    results.append(check_H2prime(spec, depth))
    results.append(check_H2doubleprime(spec))
    return results


def slice_conditions_hold(spec: CarpetSpec) -> bool:
    """True when H2 or H2'' holds, the precondition of the slice regularity results."""

    try:
        if check_H2(spec).holds:
            return True
    except UncertifiedHullError as error:
        logger.debug('falling back to H2\'\': %s', error)
    return check_H2doubleprime(spec).holds
