"""
dimension.py

Dyadic box counting on a carpet, Minkowski and Assouad dimension estimates, and a search
over dyadic-window minisets (homotheties sending a dyadic square D onto the unit square)
for the one with the most occupied cubes.

Counting happens in the unit frame: the carpet is conjugated so that Q sits in [0, 1]^2 with
its longer side of length one. Cubes are half-open [k 2^-n, (k+1) 2^-n) except on the top
and right faces of the unit square, which are closed.

Cubes are found by a pruned descent: a cylinder whose rectangle lies in one cube marks that
cube and stops; a cylinder whose cubes are all marked already is dropped; at the depth cap
the remaining cylinders mark every cube their rectangle meets (raw count) and the cube of one
point of E inside them (adjusted count). Raw counts bound the true count from above and
adjusted counts from below.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
import numpy as np
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ResolutionTooCoarseError
from carpet_lab.geometry import PointSet2D
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import compose_arrays
from carpet_lab.ifs_core import level_maps
from carpet_lab.ifs_core import points_of
from carpet_lab.ifs_core import rect_point_distances
from carpet_lab.ifs_core import rects_of
from carpet_lab.ifs_core import unit_frame
from carpet_lab.ifs_core import word_budget

logger = logging.getLogger('root')

MAX_EXTRA_DEPTH = 48
MIN_BASELINE = 3
MICROSET_CANDIDATES = 4


@dataclass(frozen=True)
class DyadicCount:
    level: int
    count: int
    adjusted: int


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    lower_slope: float
    upper_slope: float
    level_range: tuple[int, int]
    method: str
    adjusted: float
    samples: int

    def to_row(self) -> dict:
        return {
            'method': self.method,
            'level_lo': self.level_range[0],
            'level_hi': self.level_range[1],
            'value': self.value,
            'adjusted': self.adjusted,
            'samples': self.samples
        }


@dataclass(frozen=True)
class RectCover:
    """Rectangles covering a set, with one point of the set in each."""

    rects: np.ndarray
    points: np.ndarray
    resolution: float


def _cell_index(values: np.ndarray, level: int) -> np.ndarray:
    size = 1 << level
    return np.clip(np.floor(values * size), 0, size - 1).astype(np.int64)


def _codes(ix: np.ndarray, iy: np.ndarray, level: int) -> np.ndarray:
    return (ix << level) | iy


@dataclass(frozen=True)
class CellSet:
    """Occupied cubes of one level, as sorted codes (ix << level) | iy."""

    level: int
    raw: np.ndarray
    adjusted: np.ndarray

    def count(self) -> DyadicCount:
        return DyadicCount(self.level, len(self.raw), len(self.adjusted))

    @staticmethod
    def _coarsen_codes(codes: np.ndarray, level: int, target: int) -> np.ndarray:
        shift = level - target
        ix, iy = codes >> level, codes & ((1 << level) - 1)
        return np.unique(_codes(ix >> shift, iy >> shift, target))

    def coarsen(self, target: int) -> CellSet:
        """Cubes of a coarser level containing the occupied cubes."""

        if not 0 <= target <= self.level:
            raise ValueError(f"cannot coarsen level {self.level} to {target}")
        return CellSet(target,
                       self._coarsen_codes(self.raw, self.level, target),
                       self._coarsen_codes(self.adjusted, self.level, target))

    def cells(self, which: str = 'raw') -> np.ndarray:
        """Rows (ix, iy)."""

        codes = self.raw if which == 'raw' else self.adjusted
        return np.stack([codes >> self.level, codes & ((1 << self.level) - 1)], axis=-1)


def _rect_cells(rects: np.ndarray, level: int) -> np.ndarray:
    """Codes of every cube met by rectangles narrower than one cube."""

    ix0, ix1 = _cell_index(rects[:, 0], level), _cell_index(rects[:, 1], level)
    iy0, iy1 = _cell_index(rects[:, 2], level), _cell_index(rects[:, 3], level)
    return np.unique(np.concatenate([_codes(ix0, iy0, level), _codes(ix0, iy1, level),
                                     _codes(ix1, iy0, level), _codes(ix1, iy1, level)]))


def box_count(shape, level: int) -> DyadicCount:
    """Occupied level-n cubes of a point set or rectangle cover inside the unit square."""

    side = 2.0 ** -level
    if shape.resolution >= side / 4:
        raise ResolutionTooCoarseError(
            f"resolution {shape.resolution} is not below a quarter of the cube side {side}")
    if isinstance(shape, PointSet2D):
        codes = np.unique(_codes(_cell_index(shape.points[:, 0], level),
                                 _cell_index(shape.points[:, 1], level), level))
        return DyadicCount(level, len(codes), len(codes))
    raw = _rect_cells(shape.rects, level)
    adjusted = np.unique(_codes(_cell_index(shape.points[:, 0], level),
                                _cell_index(shape.points[:, 1], level), level))
    return DyadicCount(level, len(np.union1d(raw, adjusted)), len(adjusted))


def rect_cover(spec: CarpetSpec, depth: int) -> RectCover:
    """Depth-m construction rectangles of the unit-frame carpet with a point of E in each."""

    framed = unit_frame(spec)
    maps = level_maps(framed, depth)
    return RectCover(rects_of(maps, framed.q),
                     points_of(maps, framed.anchor),
                     framed.diam_q * float(framed.alpha_bar) ** depth)


def certified_depth(spec: CarpetSpec, level: int) -> int:
    """Least m with alpha_bar^m diam(Q) < 2^-n / 4."""

    target = 2.0 ** -level / 4
    alpha_bar = float(spec.alpha_bar)
    for depth in range(MAX_EXTRA_DEPTH + level + 1):
        if alpha_bar ** depth * spec.diam_q < target:
            return depth
    return MAX_EXTRA_DEPTH + level


def dyadic_cells(spec: CarpetSpec,
                 level: int,
                 ball: tuple[tuple[float, float], float] | None = None,
                 max_depth: int | None = None,
                 budget: int | None = None) -> CellSet:
    """Occupied level-n cubes of E (optionally of E inside a closed ball), unit frame."""

    framed = unit_frame(spec)
    budget = word_budget() if budget is None else budget
    max_depth = certified_depth(framed, level) if max_depth is None else max_depth
    side = 2.0 ** -level
    base = framed.map_array()
    maps = np.array([[1.0, 1.0, 0.0, 0.0]])
    raw_parts: list[np.ndarray] = []
    adjusted_parts: list[np.ndarray] = []
    marked = np.empty(0, dtype=np.int64)

    for depth in range(1, max_depth + 1):
        maps = compose_arrays(maps, base)
        rects = rects_of(maps, framed.q)
        if ball is not None:
            keep = rect_point_distances(rects, ball[0]) <= ball[1]
            maps, rects = maps[keep], rects[keep]
        if len(maps) == 0:
            break
        if len(maps) > budget:
            raise DepthBudgetExceededError(
                f"{len(maps)} cylinders at depth {depth} exceed the budget of {budget}")

        ix0, ix1 = _cell_index(rects[:, 0], level), _cell_index(rects[:, 1], level)
        iy0, iy1 = _cell_index(rects[:, 2], level), _cell_index(rects[:, 3], level)
        single = (ix0 == ix1) & (iy0 == iy1)
        if np.any(single):
            resolved = np.unique(_codes(ix0[single], iy0[single], level))
            raw_parts.append(resolved)
            if ball is None:
                adjusted_parts.append(resolved)
            else:
                points = points_of(maps[single], framed.anchor)
                inside = np.hypot(points[:, 0] - ball[0][0], points[:, 1] - ball[0][1]) <= ball[1]
                adjusted_parts.append(_codes(ix0[single][inside], iy0[single][inside], level))
            marked = np.union1d(marked, resolved)
        maps, rects = maps[~single], rects[~single]

        small = (rects[:, 1] - rects[:, 0] < side) & (rects[:, 3] - rects[:, 2] < side)
        if np.any(small) and len(marked):
            corners = [np.isin(_codes(a, b, level), marked)
                       for a, b in ((ix0[~single], iy0[~single]), (ix0[~single], iy1[~single]),
                                    (ix1[~single], iy0[~single]), (ix1[~single], iy1[~single]))]
            covered = small & corners[0] & corners[1] & corners[2] & corners[3]
            maps, rects = maps[~covered], rects[~covered]
        if len(maps) == 0:
            break

    if len(maps):
        if np.any((rects[:, 1] - rects[:, 0] >= side) | (rects[:, 3] - rects[:, 2] >= side)):
            raise ResolutionTooCoarseError(
                f"depth {max_depth} leaves rectangles wider than the cube side {side}")
        raw_parts.append(_rect_cells(rects, level))
        points = points_of(maps, framed.anchor)
        if ball is not None:
            points = points[np.hypot(points[:, 0] - ball[0][0], points[:, 1] - ball[0][1]) <= ball[1]]
        adjusted_parts.append(_codes(_cell_index(points[:, 0], level),
                                     _cell_index(points[:, 1], level), level))

    adjusted = np.unique(np.concatenate(adjusted_parts)) if adjusted_parts else np.empty(0, dtype=np.int64)
    raw = np.union1d(np.concatenate(raw_parts) if raw_parts else np.empty(0, dtype=np.int64), adjusted)
    logger.debug('cubes at level %s: raw %s, adjusted %s', level, len(raw), len(adjusted))
    return CellSet(level, raw.astype(np.int64), adjusted.astype(np.int64))


def _baseline(lo: int, hi: int) -> int:
    return min(MIN_BASELINE, hi - lo)


def _slopes(levels: list[int], counts: list[int], baseline: int = 1) -> tuple[float, float, float]:
    """Least-squares slope of log2 counts, with the least and greatest two-point slopes over
    pairs of levels at least baseline apart."""

    logs = np.log2(np.maximum(np.asarray(counts, dtype=float), 1.0))
    value = float(np.polyfit(np.asarray(levels, dtype=float), logs, 1)[0])
    pairs = [(logs[j] - logs[i]) / (levels[j] - levels[i])
             for i in range(len(levels)) for j in range(i + 1, len(levels))
             if levels[j] - levels[i] >= baseline]
    return value, float(min(pairs)), float(max(pairs))


def minkowski_estimate(spec: CarpetSpec, level_range: tuple[int, int]) -> DimensionEstimate:
    """Least-squares slope of log2 N_n against n over the level range.

    The lower and upper slopes are the extreme two-point slopes over level pairs at least
    MIN_BASELINE apart (or the whole range when it is shorter).
    """

    lo, hi = level_range
    if not 0 <= lo < hi:
        raise ValueError(f"invalid level range {level_range}")
    finest = dyadic_cells(spec, hi)
    levels = list(range(lo, hi + 1))
    cell_sets = [finest.coarsen(n) for n in levels]
    value, lower, upper = _slopes(levels, [len(c.raw) for c in cell_sets], _baseline(lo, hi))
    adjusted, _, _ = _slopes(levels, [len(c.adjusted) for c in cell_sets])
    logger.info('minkowski estimate over levels %s..%s: %s', lo, hi, value)
    return DimensionEstimate(value, min(lower, value), max(upper, value), (lo, hi), 'minkowski',
                             adjusted, len(levels))


def cube_level(r: float) -> int:
    """Level whose cube side is 2r (rounded to the nearest power of two)."""

    return max(0, int(round(math.log2(1 / (2 * r)))))


def _densest_window(cells: np.ndarray, shift: int) -> int:
    if not len(cells):
        return 0
    _, counts = np.unique(cells >> shift, axis=0, return_counts=True)
    return int(counts.max())


def assouad_estimate(spec: CarpetSpec,
                     schedule: list[tuple[tuple[float, float], float, float]],
                     level_range: tuple[int, int] | None = None) -> DimensionEstimate:
    """sup of log N(E n B(x, R), r) / log(R / r) over the schedule, unit-frame coordinates.

    N is the number of cubes of side 2r meeting E inside the closed ball. With a level range
    the supremum also runs over cube samples: for levels a < b of the range at least
    MIN_BASELINE apart, log2 of the largest number of occupied level-b cubes inside one
    level-a cube, over b - a. These dominate the two-point Minkowski slopes of the same range.
    """

    if not schedule and level_range is None:
        raise PreconditionError("the assouad schedule is empty")
    ratios, adjusted_ratios, levels = [], [], []
    for center, big, small in schedule:
        if big / small < 4:
            raise PreconditionError(f"scale ratio R / r = {big / small} is below 4")
        level = cube_level(small)
        cells = dyadic_cells(spec, level, ball=((float(center[0]), float(center[1])), big))
        scale = math.log(big / small)
        ratios.append(math.log(max(len(cells.raw), 1)) / scale)
        adjusted_ratios.append(math.log(max(len(cells.adjusted), 1)) / scale)
        levels.append(level)
        logger.debug('assouad sample at %s, R=%s, r=%s: %s cubes', center, big, small, len(cells.raw))

    samples = len(schedule)
    if level_range is not None:
        lo, hi = level_range
        if not 0 <= lo < hi:
            raise ValueError(f"invalid level range {level_range}")
        if hi - lo < 2:
            raise PreconditionError(f"level range {level_range} spans a scale ratio below 4")
        baseline = _baseline(lo, hi)
        finest = dyadic_cells(spec, hi)
        for a in range(lo, hi - baseline + 1):
            for b in range(a + baseline, hi + 1):
                cells = finest.coarsen(b)
                ratios.append(math.log2(max(_densest_window(cells.cells(), b - a), 1)) / (b - a))
                adjusted_ratios.append(
                    math.log2(max(_densest_window(cells.cells('adjusted'), b - a), 1)) / (b - a))
                levels.extend((a, b))
                samples += 1

    value = max(ratios)
    logger.info('assouad estimate over %s samples: %s', samples, value)
    return DimensionEstimate(value, min(ratios), value, (min(levels), max(levels)), 'assouad',
                             max(adjusted_ratios), samples)


def assouad_schedule(spec: CarpetSpec,
                     count: int,
                     seed: int = 0,
                     radius_levels: tuple[int, int] = (1, 3),
                     ratio_level: int = 6) -> list[tuple[tuple[float, float], float, float]]:
    """Balls centred at points of E (unit frame) with R = 2^-a and 2r = 2^-(a + ratio_level)."""

    framed = unit_frame(spec)
    rng = np.random.default_rng(seed)
    depth = max(1, min(8, int(math.log(word_budget()) / math.log(spec.n_maps)) - 1))
    points = points_of(level_maps(framed, depth), framed.anchor)
    schedule = []
    for _ in range(count):
        center = points[int(rng.integers(len(points)))]
        a = int(rng.integers(radius_levels[0], radius_levels[1] + 1))
        big = 2.0 ** -a
        schedule.append(((float(center[0]), float(center[1])), big, 2.0 ** -(a + ratio_level) / 2))
    return schedule


@dataclass(frozen=True)
class Microset:
    window_depth: int
    window_address: tuple[int, int]
    count: DyadicCount
    counts: tuple[tuple[int, int], ...]

    @property
    def scaling(self) -> int:
        return 1 << self.window_depth

    def to_json(self) -> dict:
        return {
            'window_depth': self.window_depth,
            'window_address': list(self.window_address),
            'lambda': self.scaling,
            'z': [-self.window_address[0], -self.window_address[1]],
            'counts': [list(pair) for pair in self.counts]
        }


def search_level_cap(spec: CarpetSpec) -> int:
    """Finest level the microset search counts over the whole carpet at once."""

    return max(1, int(math.log(word_budget()) / math.log(max(2, spec.n_maps))) - 2)


def _window_cells(spec: CarpetSpec, depth: int, address: tuple[int, int], level: int) -> np.ndarray:
    """Occupied level-n cubes of the rescaled E n D, D the dyadic square of the given depth."""

    ix, iy = address
    side = 2.0 ** -depth
    center = ((ix + 0.5) * side, (iy + 0.5) * side)
    cells = dyadic_cells(spec, depth + level, ball=(center, side * math.sqrt(0.5) * (1 + 1e-9))).cells()
    inside = (cells[:, 0] >> level == ix) & (cells[:, 1] >> level == iy)
    return cells[inside] - (np.array([ix, iy]) << level)


def microset_search(spec: CarpetSpec,
                    level: int,
                    window_budget: int,
                    finest: CellSet | None = None) -> Microset:
    """Dyadic window D of depth <= window_budget maximizing the level-n count of the rescaled E n D.

    Windows whose level-n cubes sit at or above search_level_cap are counted exhaustively
    from one global cell set (or the finer one passed in). Deeper, only the MICROSET_CANDIDATES
    windows of each depth that are densest at the global level are recounted, each by a
    descent clipped to the window. Ties go to the lexicographically smallest (depth, ix, iy).
    """

    if level < 1 or window_budget < 0:
        raise ValueError(f"invalid level {level} or window budget {window_budget}")
    global_level = min(level + window_budget, max(search_level_cap(spec), window_budget))
    if finest is None or finest.level < global_level:
        finest = dyadic_cells(spec, global_level)
    all_cells = finest.cells()

    best = None
    for depth in range(window_budget + 1):
        if depth + level <= finest.level:
            cells = finest.coarsen(level + depth).cells()
            addresses, counts = np.unique(cells >> level, axis=0, return_counts=True)
            order = np.lexsort((addresses[:, 1], addresses[:, 0], -counts))
            top = order[0]
            found = [(int(counts[top]), int(addresses[top, 0]), int(addresses[top, 1]), None)]
        else:
            addresses, counts = np.unique(all_cells >> (finest.level - depth), axis=0, return_counts=True)
            order = np.lexsort((addresses[:, 1], addresses[:, 0], -counts))[:MICROSET_CANDIDATES]
            found = []
            for index in order:
                address = (int(addresses[index, 0]), int(addresses[index, 1]))
                local = _window_cells(spec, depth, address, level)
                found.append((len(local), address[0], address[1], local))
            found.sort(key=lambda item: (-item[0], item[1], item[2]))
        count, ix, iy, local = found[0]
        if best is None or count > best[0]:
            best = (count, depth, ix, iy, local)
    count, depth, ix, iy, local = best

    if local is None:
        window_cells = finest.coarsen(level + depth).cells()
        inside = (window_cells[:, 0] >> level == ix) & (window_cells[:, 1] >> level == iy)
        local = window_cells[inside] - (np.array([ix, iy]) << level)
    history = []
    for n in range(1, level + 1):
        shift = level - n
        history.append((n, len(np.unique(local >> shift, axis=0))))
    logger.info('best microset at level %s: window depth %s address (%s, %s), count %s',
                level, depth, ix, iy, count)
    return Microset(depth, (ix, iy), DyadicCount(level, count, count), tuple(history))


@dataclass(frozen=True)
class MicrosetGap:
    microset_slope: float
    assouad: float
    gap: float
    tolerance: float
    counts: tuple[tuple[int, int], ...]
    fitted_slope: float = math.nan

    @property
    def passed(self) -> bool:
        return self.microset_slope >= self.assouad - self.tolerance


def microset_dimension_gap(spec: CarpetSpec,
                           level_range: tuple[int, int],
                           schedule: list[tuple[tuple[float, float], float, float]],
                           window_budget: int = 2,
                           tolerance: float = 0.1,
                           assouad_levels: tuple[int, int] | None = None) -> MicrosetGap:
    """Count slope of the best microsets against the Assouad estimate.

    The microset slope is max_n log2 M_n / n, the steepest two-point slope from the window
    itself (one cube at level 0) to level n of the best microset. assouad_levels adds cube
    samples to the Assouad estimate, see assouad_estimate.
    """

    lo, hi = level_range
    if not 1 <= lo < hi:
        raise ValueError(f"invalid level range {level_range}")
    levels = list(range(lo, hi + 1))
    finest = dyadic_cells(spec, min(hi + window_budget, max(search_level_cap(spec), window_budget)))
    counts = [microset_search(spec, n, window_budget, finest).count.count for n in levels]
    slope = max(math.log2(max(count, 1)) / n for n, count in zip(levels, counts))
    fitted, _, _ = _slopes(levels, counts)
    assouad = assouad_estimate(spec, schedule, assouad_levels).value
    logger.info('microset slope %s against assouad estimate %s', slope, assouad)
    return MicrosetGap(slope, assouad, assouad - slope, tolerance, tuple(zip(levels, counts)), fitted)
