"""
geometry.py

Point-set and interval-set geometry on a carpet: representative samples of the attractor,
Hausdorff distances between finite sets, vertical slices as outer interval covers, and
closed epsilon-neighbourhoods.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union
import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.errors import EmptyInputError
from carpet_lab.errors import EmptyIntersectionError
from carpet_lab.errors import NegativeEpsilonError
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import compose_arrays
from carpet_lab.ifs_core import level_maps
from carpet_lab.ifs_core import points_of
from carpet_lab.ifs_core import rects_of
from carpet_lab.ifs_core import word_budget
from carpet_lab.intervals import IntervalUnion1D

logger = logging.getLogger('root')

BRUTE_FORCE_PAIRS = 4_000_000
SLICE_SLACK = 1e-12


@dataclass(frozen=True)
class PointSet2D:
    """Finite planar sample with its certified Hausdorff error to the target set."""

    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, 'points', points)
        if self.resolution < 0:
            raise ValueError(f"resolution must be non-negative, got {self.resolution}")

    def __len__(self) -> int:
        return len(self.points)

    def is_empty(self) -> bool:
        return len(self.points) == 0

    def clip_ball(self, center, radius: float) -> PointSet2D:
        """Points inside the closed ball."""

        center = np.asarray(center, dtype=float)
        inside = np.linalg.norm(self.points - center, axis=1) <= radius
        return PointSet2D(self.points[inside], self.resolution)


def attractor_points(spec: CarpetSpec, depth: int, budget: int | None = None) -> PointSet2D:
    """One point per word of length depth: the image of the center of Q."""

    maps = level_maps(spec, depth, budget)
    points = points_of(maps, spec.q.center)
    resolution = spec.diam_q * float(spec.alpha_bar) ** depth
    logger.debug('attractor sample at depth %s: %s points, resolution %s', depth, len(points), resolution)
    return PointSet2D(points, resolution)


def directed_distances(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Distance from each source point to the nearest target point."""

    if len(source) * len(target) <= BRUTE_FORCE_PAIRS:
        return cdist(source, target).min(axis=1)
    distances, _ = cKDTree(target).query(source)
    return distances


def hausdorff_distance(first: PointSet2D, second: PointSet2D) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""

    if first.is_empty() or second.is_empty():
        raise EmptyInputError("hausdorff distance needs two nonempty point sets")
    return float(max(directed_distances(first.points, second.points).max(),
                     directed_distances(second.points, first.points).max()))


def restricted_hausdorff(first: PointSet2D, second: PointSet2D, center, radius: float) -> float:
    """Hausdorff distance of the parts of both sets inside the closed ball."""

    first_clipped = first.clip_ball(center, radius)
    second_clipped = second.clip_ball(center, radius)
    if first_clipped.is_empty() or second_clipped.is_empty():
        raise EmptyIntersectionError(f"a set misses the ball of radius {radius} at {tuple(center)}")
    return hausdorff_distance(first_clipped, second_clipped)


def slice_rects(spec: CarpetSpec, x: float, depth: int, budget: int | None = None) -> np.ndarray:
    """Depth-m construction rectangles whose x-projection contains x."""

    budget = word_budget() if budget is None else budget
    base = spec.map_array()
    maps = np.array([[1.0, 1.0, 0.0, 0.0]])
    rects = rects_of(maps, spec.q)
    for level in range(depth):
        maps = compose_arrays(maps, base)
        rects = rects_of(maps, spec.q)
        keep = (rects[:, 0] - SLICE_SLACK <= x) & (x <= rects[:, 1] + SLICE_SLACK)
        maps, rects = maps[keep], rects[keep]
        if len(maps) > budget:
            raise DepthBudgetExceededError(
                f"{len(maps)} rectangles in the slice at level {level + 1} exceed the budget of {budget}")
    if depth == 0 and not rects[0, 0] - SLICE_SLACK <= x <= rects[0, 1] + SLICE_SLACK:
        return rects[:0]
    return rects


def vertical_slice(spec: CarpetSpec, x: float, depth: int, budget: int | None = None) -> IntervalUnion1D:
    """Outer cover of the vertical slice of E at abscissa x."""

    rects = slice_rects(spec, float(x), depth, budget)
    return IntervalUnion1D.from_intervals((float(lo), float(hi)) for lo, hi in rects[:, 2:4])


def epsilon_neighborhood(shape: Union[IntervalUnion1D, PointSet2D],
                         epsilon: float) -> Union[IntervalUnion1D, PointSet2D]:
    """Closed epsilon-neighbourhood.

    A point set stands for its fattening: the points are kept and epsilon is added to
    the resolution.
    """

    if epsilon < 0:
        raise NegativeEpsilonError(f"epsilon must be non-negative, got {epsilon}")
    if isinstance(shape, IntervalUnion1D):
        return shape.fatten(epsilon)
    return PointSet2D(shape.points, shape.resolution + epsilon)
