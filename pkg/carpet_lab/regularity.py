"""
regularity.py

Porosity and uniform perfectness of one-dimensional sets, estimated on a grid of centers
and radii, and checked on vertical slices of a carpet against the constants

- porosity: min{delta, 1} / 4,
- uniform perfectness: delta^-1 * alpha_under^-(k+1), k the least integer with alpha_bar^k < delta.

Porosity at (x, r) is the radius of the largest interval inside (x - r, x + r) that misses
the set, divided by r. Uniform perfectness at (x, r) is r divided by the largest distance
from x to a point of the set within the closed ball, the least D such that the closed
annulus r/D <= |y - x| <= r meets the set. It is only required when the set escapes the
closed ball.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
import numpy as np
from carpet_lab.conditions import horizontal_projection
from carpet_lab.conditions import slice_conditions_hold
from carpet_lab.errors import EmptyInputError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ResolutionTooCoarseError
from carpet_lab.geometry import vertical_slice
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import normalize
from carpet_lab.ifs_core import to_normalized
from carpet_lab.intervals import IntervalUnion1D

logger = logging.getLogger('root')

DEFAULT_GRID = 8
MAX_CENTERS = 64
DEFAULT_SLICE_DEPTH = 8


@dataclass(frozen=True)
class Estimate:
    """Extremal value over the sampled (x, r) grid and where it was attained."""

    value: float
    witness_x: float
    witness_r: float
    samples: int


@dataclass(frozen=True)
class SliceConstants:
    porosity_bound: float
    perfectness_bound: float
    k: int


@dataclass(frozen=True)
class RegularityReport:
    """Both estimates of one slice against the slice constants."""

    x: float
    porosity: Estimate
    perfectness: Estimate
    scale_range: tuple[float, float]
    constants: SliceConstants
    slack: float

    @property
    def porosity_ok(self) -> bool:
        return self.porosity.value >= self.constants.porosity_bound - self.slack

    @property
    def perfectness_ok(self) -> bool:
        return self.perfectness.value <= self.constants.perfectness_bound + self.slack

    @property
    def passed(self) -> bool:
        return self.porosity_ok and self.perfectness_ok

    def to_row(self) -> dict:
        return {
            'x': self.x,
            'porosity_est': self.porosity.value,
            'porosity_bound': self.constants.porosity_bound,
            'perfectness_est': self.perfectness.value,
            'perfectness_bound': self.constants.perfectness_bound,
            'pass': str(self.passed).lower()
        }


def slice_constants(delta: float, alpha_bar: float, alpha_under: float) -> SliceConstants:
    """Porosity and perfectness constants of the slices for a separation delta."""

    if delta <= 0:
        raise PreconditionError(f"slice constants need a positive separation, got {delta}")
    k = 0
    while alpha_bar ** k >= delta:
        k += 1
    return SliceConstants(porosity_bound=min(delta, 1.0) / 4,
                          perfectness_bound=alpha_under ** -(k + 1) / delta,
                          k=k)


def radius_grid(scale_range: tuple[float, float], grid: int) -> np.ndarray:
    r_min, r_max = scale_range
    if not 0 < r_min <= r_max:
        raise ValueError(f"invalid scale range {scale_range}")
    return np.geomspace(r_min, r_max, num=max(grid, 1))


def default_centers(shape: IntervalUnion1D, max_centers: int = MAX_CENTERS) -> list[float]:
    """Component midpoints and left endpoints, thinned evenly to max_centers."""

    candidates = sorted({float(c) for c in shape.midpoints()} | {float(lo) for lo, _ in shape})
    if len(candidates) <= max_centers:
        return candidates
    picks = np.linspace(0, len(candidates) - 1, num=max_centers).round().astype(int)
    return [candidates[i] for i in sorted(set(picks.tolist()))]


def hole_fraction(shape: IntervalUnion1D, x: float, r: float) -> float:
    """Largest hole radius inside (x - r, x + r), divided by r."""

    gaps = shape.gaps(x - r, x + r)
    if not gaps:
        return 0.0
    return max((float(q) - float(p)) / 2 for p, q in gaps) / r


def required_perfectness(shape: IntervalUnion1D, x: float, r: float) -> float | None:
    """Least D for which the closed annulus meets the set; None when the set stays in the ball."""

    lo, hi = shape.hull()
    if float(lo) >= x - r and float(hi) <= x + r:
        return None
    farthest = 0.0
    for a, b in shape.clip(x - r, x + r):
        farthest = max(farthest, abs(float(a) - x), abs(float(b) - x))
    return math.inf if farthest == 0 else r / farthest


def _check_inputs(shape: IntervalUnion1D, scale_range, resolution: float) -> None:
    if shape.is_empty():
        raise EmptyInputError("regularity estimates need a nonempty set")
    if scale_range[0] < resolution:
        raise ResolutionTooCoarseError(
            f"smallest radius {scale_range[0]} is below the set resolution {resolution}")


def porosity_estimate(shape: IntervalUnion1D,
                      scale_range: tuple[float, float],
                      grid: int = DEFAULT_GRID,
                      centers: list[float] | None = None,
                      resolution: float = 0.0) -> Estimate:
    """Least hole fraction over the sampled centers and radii."""

    _check_inputs(shape, scale_range, resolution)
    centers = default_centers(shape) if centers is None else centers
    best = Estimate(math.inf, math.nan, math.nan, 0)
    samples = 0
    for r in radius_grid(scale_range, grid):
        for x in centers:
            samples += 1
            value = hole_fraction(shape, x, float(r))
            if value < best.value:
                best = Estimate(value, x, float(r), 0)
    return Estimate(best.value, best.witness_x, best.witness_r, samples)


def uniform_perfectness_estimate(shape: IntervalUnion1D,
                                 scale_range: tuple[float, float],
                                 grid: int = DEFAULT_GRID,
                                 centers: list[float] | None = None,
                                 resolution: float = 0.0) -> Estimate:
    """Largest required D over the sampled centers and radii (at least 1)."""

    _check_inputs(shape, scale_range, resolution)
    centers = default_centers(shape) if centers is None else centers
    best = Estimate(1.0, math.nan, math.nan, 0)
    samples = 0
    for r in radius_grid(scale_range, grid):
        for x in centers:
            samples += 1
            value = required_perfectness(shape, x, float(r))
            if value is not None and value > best.value:
                best = Estimate(value, x, float(r), 0)
    return Estimate(best.value, best.witness_x, best.witness_r, samples)


def assess_slice(shape: IntervalUnion1D,
                 x: float,
                 constants: SliceConstants,
                 scale_range: tuple[float, float],
                 grid: int = DEFAULT_GRID,
                 resolution: float = 0.0) -> RegularityReport:
    """Both estimates of one slice; the slack 2 * resolution / r_min absorbs the cover error."""

    porosity = porosity_estimate(shape, scale_range, grid, resolution=resolution)
    perfectness = uniform_perfectness_estimate(shape, scale_range, grid, resolution=resolution)
    report = RegularityReport(x=x,
                              porosity=porosity,
                              perfectness=perfectness,
                              scale_range=scale_range,
                              constants=constants,
                              slack=2 * resolution / scale_range[0])
    logger.debug('slice at %s: porosity %s, perfectness %s, passed=%s',
                 x, porosity.value, perfectness.value, report.passed)
    return report


def abscissa_samples(spec: CarpetSpec, count: int, depth: int = 4) -> list[float]:
    """Evenly spaced abscissae inside the certified outer projection, skipping its gaps."""

    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    outer, _ = horizontal_projection(spec, depth)
    rows = outer.to_rows()
    lengths = np.array([hi - lo for lo, hi in rows])
    total = float(lengths.sum())
    if total == 0:
        return [rows[0][0]] * count
    targets = (np.arange(count) + 0.5) / count * total
    ends = np.cumsum(lengths)
    samples = []
    for target in targets:
        index = min(int(np.searchsorted(ends, target)), len(rows) - 1)
        start = ends[index] - lengths[index]
        samples.append(rows[index][0] + float(target - start))
    return samples


def slice_resolution(spec: CarpetSpec, depth: int) -> float:
    """Hausdorff error of a depth-m slice cover: the tallest depth-m rectangle."""

    return float(max(m.alpha2 for m in spec.maps)) ** depth * float(spec.q.height)


def default_scale_range(spec: CarpetSpec, depth: int) -> tuple[float, float]:
    alpha_bar = float(spec.alpha_bar)
    return alpha_bar ** (depth - 2) * spec.diam_q, alpha_bar ** 2 * spec.diam_q


def verify_slice_regularity(spec: CarpetSpec,
                            abscissae: list[float],
                            depth: int = DEFAULT_SLICE_DEPTH,
                            scale_range: tuple[float, float] | None = None,
                            grid: int = DEFAULT_GRID) -> list[RegularityReport]:
    """Check porosity and uniform perfectness of vertical slices at the given abscissae.

    Runs on the carpet normalized to diameter one; abscissae are given in the original
    frame and reported in it.
    """

    if not spec.ssc_certified:
        raise PreconditionError("slice regularity needs a certified strong separation condition")
    if not slice_conditions_hold(spec):
        raise PreconditionError("slice regularity needs H2 or H2''")

    normalized = normalize(spec)
    if not normalized.ssc_certified:
        raise PreconditionError("strong separation not certified on the normalized carpet")
    constants = slice_constants(float(normalized.delta_lo),
                                float(normalized.alpha_bar),
                                float(normalized.alpha_under))
    scale_range = default_scale_range(normalized, depth) if scale_range is None else scale_range
    resolution = slice_resolution(normalized, depth)

    reports = []
    for x in abscissae:
        local_x = float(to_normalized(spec, (x, spec.q.ymin))[0])
        shape = vertical_slice(normalized, local_x, depth)
        if shape.is_empty():
            raise EmptyInputError(f"the slice at {x} is empty")
        report = assess_slice(shape, local_x, constants, scale_range, grid, resolution)
        reports.append(RegularityReport(x=x,
                                        porosity=report.porosity,
                                        perfectness=report.perfectness,
                                        scale_range=report.scale_range,
                                        constants=report.constants,
                                        slack=report.slack))
    logger.info('slices verified: %s, passed: %s', len(reports), sum(r.passed for r in reports))
    return reports
