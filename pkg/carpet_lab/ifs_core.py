"""
ifs_core.py

This module defines the building blocks of a self-affine carpet: planar affine maps
with diagonal (possibly reflecting) linear parts, finite and eventually periodic words
over the map indices, axis-parallel rectangles, and the validated carpet (CarpetSpec)
carrying its certified constants.

Map coefficients are held as exact rationals (fractions.Fraction). Single words,
level-1 images and shallow separation certificates are computed exactly; bulk
enumerations of whole levels use numpy float64 arrays whose rows are ordered
lexicographically by word (first symbol most significant).

The word budget (maximum number of words enumerated at one depth) is read from the
CARPET_LAB_BUDGET environment variable.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from dataclasses import dataclass
from dataclasses import replace
from fractions import Fraction
from typing import Iterator
from typing import Union
import numpy as np
from scipy.spatial.distance import cdist
from carpet_lab.errors import DegenerateMapError
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.errors import EmptySystemError
from carpet_lab.errors import InputParseError
from carpet_lab.errors import NoInvariantStartError
from carpet_lab.errors import NonContractiveError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import SymbolOutOfRangeError

logger = logging.getLogger('root')

Number = Union[Fraction, float]

BUDGET_ENV = 'CARPET_LAB_BUDGET'
DEFAULT_WORD_BUDGET = 1 << 22
HULL_TOLERANCE = 1e-12
MAX_HULL_ITERATIONS = 200000
EXACT_PAIR_LIMIT = 4096
MAX_CERTIFICATION_DEPTH = 6
FLOAT_SLACK = 1e-12
CHUNK_ROWS = 2048


def word_budget() -> int:
    """Return the word budget from the environment (or the default)."""

    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw == '':
        return DEFAULT_WORD_BUDGET
    try:
        budget = int(raw)
    except ValueError as error:
        raise InputParseError(f"invalid {BUDGET_ENV}: {raw!r}") from error
    if budget <= 0:
        raise InputParseError(f"{BUDGET_ENV} must be positive, got {budget}")
    return budget


def check_budget(n_maps: int, depth: int, budget: int | None = None) -> None:
    """Raise DepthBudgetExceededError when N^depth words exceed the budget."""

    budget = word_budget() if budget is None else budget
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if n_maps ** depth > budget:
        raise DepthBudgetExceededError(
            f"{n_maps}^{depth} words exceed the budget of {budget}")


def to_exact(value: object) -> Fraction:
    """Convert an input number to an exact rational.

    Floats are read through their shortest decimal representation, so 0.2 becomes 1/5.
    """

    if isinstance(value, bool):
        raise InputParseError(f"unsupported number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputParseError(f"non-finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as error:
            raise InputParseError(f"unsupported number: {value!r}") from error
    raise InputParseError(f"unsupported number: {value!r}")


@dataclass(frozen=True)
class Rect:
    """Closed axis-parallel rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: Number
    xmax: Number
    ymin: Number
    ymax: Number

    def __post_init__(self) -> None:
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise ValueError(f"inverted rectangle: {self}")

    @property
    def width(self) -> Number:
        return self.xmax - self.xmin

    @property
    def height(self) -> Number:
        return self.ymax - self.ymin

    @property
    def diam(self) -> float:
        return math.hypot(float(self.width), float(self.height))

    @property
    def center(self) -> tuple[Number, Number]:
        return (self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2

    def distance(self, other: Rect) -> Number:
        """Euclidean distance between the rectangles.

        Exact whenever the rectangles are separated along one axis only; otherwise a
        float from math.hypot.
        """

        dx = max(0, other.xmin - self.xmax, self.xmin - other.xmax)
        dy = max(0, other.ymin - self.ymax, self.ymin - other.ymax)
        if dx == 0:
            return dy
        if dy == 0:
            return dx
        return math.hypot(float(dx), float(dy))

    def contains(self, other: Rect, slack: Number = 0) -> bool:
        """Return True when other lies inside the slack-neighbourhood of self."""

        return (self.xmin - slack <= other.xmin and other.xmax <= self.xmax + slack
                and self.ymin - slack <= other.ymin and other.ymax <= self.ymax + slack)

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.xmin), float(self.xmax), float(self.ymin), float(self.ymax)


@dataclass(frozen=True)
class AffineMap2D:
    """Planar map (x, y) -> (a1 x + b1, a2 y + b2) with a diagonal linear part."""

    a1: Fraction
    a2: Fraction
    b1: Fraction = Fraction(0)
    b2: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in ('a1', 'a2', 'b1', 'b2'):
            object.__setattr__(self, name, to_exact(getattr(self, name)))

    @classmethod
    def identity(cls) -> AffineMap2D:
        return cls(Fraction(1), Fraction(1))

    @property
    def alpha1(self) -> Fraction:
        return abs(self.a1)

    @property
    def alpha2(self) -> Fraction:
        return abs(self.a2)

    def __call__(self, x: Number, y: Number) -> tuple[Number, Number]:
        return self.a1 * x + self.b1, self.a2 * y + self.b2

    def compose(self, inner: AffineMap2D) -> AffineMap2D:
        """Return self o inner."""

        return AffineMap2D(self.a1 * inner.a1,
                           self.a2 * inner.a2,
                           self.a1 * inner.b1 + self.b1,
                           self.a2 * inner.b2 + self.b2)

    def fixed_point(self) -> tuple[Fraction, Fraction]:
        return self.b1 / (1 - self.a1), self.b2 / (1 - self.a2)

    def image_x(self, lo: Number, hi: Number) -> tuple[Number, Number]:
        """Image of the interval [lo, hi] under the horizontal part."""

        first, second = self.a1 * lo + self.b1, self.a1 * hi + self.b1
        return (first, second) if first <= second else (second, first)

    def image_y(self, lo: Number, hi: Number) -> tuple[Number, Number]:
        """Image of the interval [lo, hi] under the vertical part."""

        first, second = self.a2 * lo + self.b2, self.a2 * hi + self.b2
        return (first, second) if first <= second else (second, first)

    def image_rect(self, rect: Rect) -> Rect:
        xmin, xmax = self.image_x(rect.xmin, rect.xmax)
        ymin, ymax = self.image_y(rect.ymin, rect.ymax)
        return Rect(xmin, xmax, ymin, ymax)

    def as_row(self) -> tuple[float, float, float, float]:
        return float(self.a1), float(self.a2), float(self.b1), float(self.b2)


@dataclass(frozen=True)
class Word:
    """Finite word over the symbols 1..N."""

    symbols: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, 'symbols', tuple(int(s) for s in self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __add__(self, other: Word) -> Word:
        return Word(self.symbols + tuple(other))

    def __str__(self) -> str:
        return ''.join(str(s) if s < 10 else f'({s})' for s in self.symbols)

    @property
    def prefix(self) -> Word:
        """The word without its last symbol."""

        if not self.symbols:
            raise ValueError("the empty word has no prefix")
        return Word(self.symbols[:-1])

    def truncate(self, n: int) -> Word:
        return Word(self.symbols[:n])

    def check(self, n_maps: int) -> None:
        for symbol in self.symbols:
            if not 1 <= symbol <= n_maps:
                raise SymbolOutOfRangeError(
                    f"symbol {symbol} outside 1..{n_maps} in word {self}")


@dataclass(frozen=True)
class InfiniteWord:
    """Eventually periodic infinite word: a prefix followed by a repeating cycle."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'prefix', tuple(int(s) for s in self.prefix))
        object.__setattr__(self, 'cycle', tuple(int(s) for s in self.cycle))
        if not self.cycle:
            raise ValueError("the repeating cycle must be nonempty")

    def symbol(self, index: int) -> int:
        """Symbol at 0-based position index."""

        if index < len(self.prefix):
            return self.prefix[index]
        return self.cycle[(index - len(self.prefix)) % len(self.cycle)]

    def truncate(self, n: int) -> Word:
        return Word(tuple(self.symbol(k) for k in range(n)))

    def point(self, spec: CarpetSpec) -> tuple[Fraction, Fraction]:
        """The coding point pi(i), exact."""

        cycle_map = compose(spec, Word(self.cycle))
        fixed = cycle_map.fixed_point()
        return compose(spec, Word(self.prefix))(*fixed)

    def __str__(self) -> str:
        return f"{Word(self.prefix)}({Word(self.cycle)})*"


@dataclass(frozen=True)
class BoundingRect:
    """Bounding rectangle Q of E with its certified outer error."""

    rect: Rect
    error: float
    exact: bool


@dataclass(frozen=True)
class SeparationBounds:
    """Certified interval [lower, upper] containing the separation constant."""

    depth: int
    lower: Number
    upper: Number


@dataclass(frozen=True)
class CertifiedSSC:
    depth: int
    delta_lo: Number


@dataclass(frozen=True)
class Inconclusive:
    max_depth: int


@dataclass(frozen=True)
class CarpetSpec:
    """A validated carpet IFS with its derived constants."""

    maps: tuple[AffineMap2D, ...]
    alpha_bar: Fraction
    alpha_under: Fraction
    beta: Fraction
    q: Rect
    q_error: float
    delta_bounds: SeparationBounds
    ssc_status: Union[CertifiedSSC, Inconclusive]

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def diam_q(self) -> float:
        return self.q.diam

    @property
    def delta_lo(self) -> Number:
        return self.delta_bounds.lower

    @property
    def delta_hi(self) -> Number:
        return self.delta_bounds.upper

    @property
    def ssc_certified(self) -> bool:
        return isinstance(self.ssc_status, CertifiedSSC)

    @property
    def anchor(self) -> tuple[Fraction, Fraction]:
        """A point of E: the fixed point of the first map."""

        return self.maps[0].fixed_point()

    def map_array(self) -> np.ndarray:
        """Float rows (a1, a2, b1, b2), one per map."""

        return np.array([m.as_row() for m in self.maps], dtype=float)


def _hull_step(coefficients, lo, hi):
    images = [(a * lo + b, a * hi + b) for a, b in coefficients]
    return (min(min(pair) for pair in images),
            max(max(pair) for pair in images))


def _invariant_start(coefficients: list[tuple[float, float]]) -> float:
    radius = 1.0
    for _ in range(64):
        if all(abs(a) * radius + abs(b) <= radius for a, b in coefficients):
            return radius
        radius *= 2
    raise NoInvariantStartError("no invariant interval found after 64 doublings")


def _snap_interval(coefficients: list[tuple[Fraction, Fraction]],
                   lo: float,
                   hi: float) -> tuple[Fraction, Fraction] | None:
    """Solve exactly for the interval whose extremes are attained by the same maps as
    the converged float interval; return it only when it is exactly invariant."""

    lows = [min(float(a) * lo + float(b), float(a) * hi + float(b)) for a, b in coefficients]
    highs = [max(float(a) * lo + float(b), float(a) * hi + float(b)) for a, b in coefficients]
    scale = max(1.0, abs(lo), abs(hi))
    low_candidates = [i for i, v in enumerate(lows) if v - min(lows) <= 1e-9 * scale]
    high_candidates = [i for i, v in enumerate(highs) if max(highs) - v <= 1e-9 * scale]

    for low_index, high_index in itertools.product(low_candidates, high_candidates):
        a_low, b_low = coefficients[low_index]
        a_high, b_high = coefficients[high_index]
        matrix = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
        matrix[0][0 if a_low > 0 else 1] -= a_low
        matrix[1][1 if a_high > 0 else 0] -= a_high
        det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
        if det == 0:
            continue
        left = (b_low * matrix[1][1] - matrix[0][1] * b_high) / det
        right = (matrix[0][0] * b_high - matrix[1][0] * b_low) / det
        if left > right:
            continue
        if _hull_step(coefficients, left, right) == (left, right):
            return left, right
    return None


def _bounding_interval(coefficients: list[tuple[Fraction, Fraction]],
                       tolerance: float) -> tuple[Fraction, Fraction, float, bool]:
    floats = [(float(a), float(b)) for a, b in coefficients]
    rho = max(abs(a) for a, _ in floats)
    radius = _invariant_start(floats)
    lo, hi = -radius, radius
    for _ in range(MAX_HULL_ITERATIONS):
        new_lo, new_hi = _hull_step(floats, lo, hi)
        change = max(new_lo - lo, hi - new_hi)
        lo, hi = new_lo, new_hi
        if change < tolerance:
            break
    snapped = _snap_interval(coefficients, lo, hi)
    if snapped is not None:
        return snapped[0], snapped[1], 0.0, True
    logger.debug('hull not snapped to an exact invariant interval: [%s, %s]', lo, hi)
    return Fraction(lo), Fraction(hi), tolerance / (1 - rho), False


def _bounding_rect(maps: tuple[AffineMap2D, ...], tolerance: float) -> BoundingRect:
    xmin, xmax, x_error, x_exact = _bounding_interval([(m.a1, m.b1) for m in maps], tolerance)
    ymin, ymax, y_error, y_exact = _bounding_interval([(m.a2, m.b2) for m in maps], tolerance)
    return BoundingRect(Rect(xmin, xmax, ymin, ymax), max(x_error, y_error), x_exact and y_exact)


def compute_bounding_rect(spec: CarpetSpec, tolerance: float = HULL_TOLERANCE) -> BoundingRect:
    """Smallest closed rectangle containing E, by interval hull iteration.

    The iteration starts from an invariant square found by doubling and stops once an
    iteration moves the endpoints by less than the tolerance. The result is snapped to
    an exactly invariant rectangle when the extreme maps can be identified; otherwise
    the float result is returned with outer error tolerance / (1 - contraction).
    """

    return _bounding_rect(spec.maps, tolerance)


def compose(spec: CarpetSpec, word: Word) -> AffineMap2D:
    """The composed map phi_{i1} o ... o phi_{in}."""

    word.check(spec.n_maps)
    result = AffineMap2D.identity()
    for symbol in word:
        result = result.compose(spec.maps[symbol - 1])
    return result


def cylinder_rect(spec: CarpetSpec, word: Word) -> Rect:
    """The construction rectangle Q_w = phi_w(Q)."""

    return compose(spec, word).image_rect(spec.q)


def level_words(n_maps: int, depth: int) -> Iterator[Word]:
    """All words of the given length in lexicographic order."""

    for symbols in itertools.product(range(1, n_maps + 1), repeat=depth):
        yield Word(symbols)


def word_at(n_maps: int, depth: int, index: int) -> Word:
    """The word at a row index of a lexicographic level enumeration."""

    symbols = []
    for _ in range(depth):
        index, digit = divmod(index, n_maps)
        symbols.append(digit + 1)
    return Word(tuple(reversed(symbols)))


def compose_arrays(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """All compositions outer[k] o inner[l], ordered outer-major."""

    a1 = outer[:, None, 0] * inner[None, :, 0]
    a2 = outer[:, None, 1] * inner[None, :, 1]
    b1 = outer[:, None, 0] * inner[None, :, 2] + outer[:, None, 2]
    b2 = outer[:, None, 1] * inner[None, :, 3] + outer[:, None, 3]
    return np.stack([a1, a2, b1, b2], axis=-1).reshape(-1, 4)


def level_maps(spec: CarpetSpec, depth: int, budget: int | None = None) -> np.ndarray:
    """Float rows (a1, a2, b1, b2) of every composed map of the given depth."""

    check_budget(spec.n_maps, depth, budget)
    base = spec.map_array()
    maps = np.array([[1.0, 1.0, 0.0, 0.0]])
    for _ in range(depth):
        maps = compose_arrays(maps, base)
    return maps


def rects_of(maps: np.ndarray, q: Rect) -> np.ndarray:
    """Rows (xmin, xmax, ymin, ymax) of the images of q under the given maps."""

    h, h2, v, v2 = q.as_floats()
    x0 = maps[:, 0] * h + maps[:, 2]
    x1 = maps[:, 0] * h2 + maps[:, 2]
    y0 = maps[:, 1] * v + maps[:, 3]
    y1 = maps[:, 1] * v2 + maps[:, 3]
    return np.stack([np.minimum(x0, x1), np.maximum(x0, x1),
                     np.minimum(y0, y1), np.maximum(y0, y1)], axis=-1)


def points_of(maps: np.ndarray, point: tuple[Number, Number]) -> np.ndarray:
    """Images of one point under the given maps, shape (k, 2)."""

    x, y = float(point[0]), float(point[1])
    return np.stack([maps[:, 0] * x + maps[:, 2], maps[:, 1] * y + maps[:, 3]], axis=-1)


def level_rects(spec: CarpetSpec, depth: int, budget: int | None = None) -> np.ndarray:
    """Float construction rectangles of the given depth, lexicographic rows."""

    return rects_of(level_maps(spec, depth, budget), spec.q)


def level_maps_exact(spec: CarpetSpec, depth: int, budget: int | None = None) -> list[AffineMap2D]:
    """Exact composed maps of the given depth, lexicographic order."""

    check_budget(spec.n_maps, depth, budget)
    maps = [AffineMap2D.identity()]
    for _ in range(depth):
        maps = [outer.compose(inner) for outer in maps for inner in spec.maps]
    return maps


def level_rects_exact(spec: CarpetSpec, depth: int, budget: int | None = None) -> list[Rect]:
    """Exact construction rectangles of the given depth, lexicographic order."""

    return [m.image_rect(spec.q) for m in level_maps_exact(spec, depth, budget)]


def rect_point_distances(rects: np.ndarray, center: tuple[float, float]) -> np.ndarray:
    """Distance from a point to each rectangle row."""

    cx, cy = float(center[0]), float(center[1])
    dx = np.maximum(0.0, np.maximum(rects[:, 0] - cx, cx - rects[:, 1]))
    dy = np.maximum(0.0, np.maximum(rects[:, 2] - cy, cy - rects[:, 3]))
    return np.hypot(dx, dy)


def local_cylinders(spec: CarpetSpec,
                    center: tuple[Number, Number],
                    radius: float,
                    depth: int,
                    root: np.ndarray | None = None,
                    budget: int | None = None) -> np.ndarray:
    """Composed maps of the given depth whose rectangles meet the closed ball.

    The descent prunes every subtree whose rectangle misses the ball, so the cost
    follows the number of cylinders near the center rather than N^depth. root restricts
    the descent to the subtrees of the given maps.
    """

    budget = word_budget() if budget is None else budget
    base = spec.map_array()
    maps = np.array([[1.0, 1.0, 0.0, 0.0]]) if root is None else np.atleast_2d(root)
    for level in range(depth):
        maps = compose_arrays(maps, base)
        keep = rect_point_distances(rects_of(maps, spec.q), center) <= radius
        maps = maps[keep]
        if len(maps) > budget:
            raise DepthBudgetExceededError(
                f"{len(maps)} cylinders near the ball at level {level + 1} exceed the budget of {budget}")
        if len(maps) == 0:
            break
    return maps


def _min_rect_distance(first: np.ndarray, second: np.ndarray) -> float:
    best = math.inf
    for start in range(0, len(first), CHUNK_ROWS):
        block = first[start:start + CHUNK_ROWS]
        dx = np.maximum(0.0, np.maximum(second[None, :, 0] - block[:, None, 1],
                                        block[:, None, 0] - second[None, :, 1]))
        dy = np.maximum(0.0, np.maximum(second[None, :, 2] - block[:, None, 3],
                                        block[:, None, 2] - second[None, :, 3]))
        best = min(best, float(np.hypot(dx, dy).min()))
    return best


def _cover_distance(spec: CarpetSpec, level: int) -> Number:
    """Smallest distance between depth-level covers of different first-level images.

    Distances that fall back to floats are lowered by FLOAT_SLACK so the result stays a
    lower bound.
    """

    n = spec.n_maps
    slack = FLOAT_SLACK * max(1.0, spec.diam_q)
    per_group = n ** (level - 1)
    if per_group * per_group * n * (n - 1) // 2 <= EXACT_PAIR_LIMIT:
        rects = level_rects_exact(spec, level)
        groups = [rects[g * per_group:(g + 1) * per_group] for g in range(n)]
        distances = (first.distance(second)
                     for i, j in itertools.combinations(range(n), 2)
                     for first in groups[i]
                     for second in groups[j])
        return min(max(0.0, d - slack) if isinstance(d, float) else d for d in distances)
    rects = level_rects(spec, level).reshape(n, per_group, 4)
    best = min(_min_rect_distance(rects[i], rects[j])
               for i, j in itertools.combinations(range(n), 2))
    return max(0.0, best - slack)


def _sample_distance(spec: CarpetSpec, level: int) -> float:
    """Smallest distance between representative points of different first-level images."""

    n = spec.n_maps
    points = points_of(level_maps(spec, level), spec.anchor).reshape(n, -1, 2)
    return min(float(cdist(points[i], points[j]).min())
               for i, j in itertools.combinations(range(n), 2))


def _separation_levels(spec: CarpetSpec, depth: int) -> Iterator[tuple[int, Number, Number]]:
    lower: Number = Fraction(0)
    upper: Number = math.inf
    for level in range(1, depth + 1):
        lower = max(lower, _cover_distance(spec, level))
        upper = min(upper, _sample_distance(spec, level))
        logger.debug('separation at level %s: [%s, %s]', level, float(lower), float(upper))
        yield level, lower, upper


def separation_delta(spec: CarpetSpec, depth: int) -> SeparationBounds:
    """Certified bounds on the minimal distance between first-level images of E.

    The lower bound comes from rectangle covers (exact for shallow levels), the upper
    bound from points of E; both are monotone in depth.
    """

    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    check_budget(spec.n_maps, depth)
    lower, upper = Fraction(0), math.inf
    for _, lower, upper in _separation_levels(spec, depth):
        pass
    return SeparationBounds(depth, lower, upper)


def ssc_check(spec: CarpetSpec, max_depth: int) -> Union[CertifiedSSC, Inconclusive]:
    """Certify the strong separation condition at the first depth with a positive gap."""

    check_budget(spec.n_maps, max_depth)
    for level, lower, _ in _separation_levels(spec, max_depth):
        if lower > 0:
            return CertifiedSSC(level, lower)
    return Inconclusive(max_depth)


def default_certification_depth(spec: CarpetSpec,
                                max_depth: int = MAX_CERTIFICATION_DEPTH,
                                budget: int | None = None) -> int:
    """Smallest m with alpha_bar^m diam(Q) < delta_hi / 4, capped by max_depth and budget."""

    budget = word_budget() if budget is None else budget
    cap = max_depth
    while cap > 1 and spec.n_maps ** cap > budget:
        cap -= 1
    target = _sample_distance(spec, 1) / 4
    diam = spec.diam_q
    for depth in range(1, cap + 1):
        if float(spec.alpha_bar) ** depth * diam < target:
            return depth
    return cap


def validate_carpet(maps,
                    certification_depth: int | None = None,
                    tolerance: float = HULL_TOLERANCE) -> CarpetSpec:
    """Validate an IFS and return the carpet with its certified constants."""

    maps = tuple(m if isinstance(m, AffineMap2D) else AffineMap2D(*m) for m in maps)
    if len(maps) < 2:
        raise EmptySystemError(f"a carpet needs at least two maps, got {len(maps)}")
    for index, mapping in enumerate(maps, start=1):
        if mapping.a1 == 0 or mapping.a2 == 0:
            raise DegenerateMapError(f"map {index} has a zero linear entry: {mapping}")
        if mapping.alpha1 >= 1 or mapping.alpha2 >= 1:
            raise NonContractiveError(f"map {index} is not contractive: {mapping}")

    alpha_bar = max(m.alpha1 for m in maps)
    alpha_under = min(m.alpha2 for m in maps)
    beta = max(m.alpha2 / m.alpha1 for m in maps)
    bounding = _bounding_rect(maps, tolerance)

    spec = CarpetSpec(maps=maps,
                      alpha_bar=alpha_bar,
                      alpha_under=alpha_under,
                      beta=beta,
                      q=bounding.rect,
                      q_error=bounding.error,
                      delta_bounds=SeparationBounds(0, Fraction(0), math.inf),
                      ssc_status=Inconclusive(0))

    depth = certification_depth or default_certification_depth(spec)
    check_budget(spec.n_maps, depth)
    status: Union[CertifiedSSC, Inconclusive] = Inconclusive(depth)
    lower, upper = Fraction(0), math.inf
    for level, lower, upper in _separation_levels(spec, depth):
        if lower > 0 and isinstance(status, Inconclusive):
            status = CertifiedSSC(level, lower)

    logger.debug('carpet validated: N=%s, Q=%s, delta in [%s, %s], ssc=%s',
                 len(maps), bounding.rect, float(lower), float(upper), status)
    return replace(spec,
                   delta_bounds=SeparationBounds(depth, lower, upper),
                   ssc_status=status)


def normalizing_scale(spec: CarpetSpec) -> Fraction:
    """1 / diam(Q) rounded to a decimal rational."""

    diam = spec.diam_q
    if diam == 0:
        raise PreconditionError("cannot normalize a carpet whose bounding rectangle is a point")
    return to_exact(1 / diam)


def to_normalized(spec: CarpetSpec, point: tuple[Number, Number]) -> tuple[Fraction, Fraction]:
    """Coordinates of a point in the frame of normalize(spec)."""

    scale = normalizing_scale(spec)
    return scale * (to_exact(point[0]) - spec.q.xmin), scale * (to_exact(point[1]) - spec.q.ymin)


def normalize(spec: CarpetSpec) -> CarpetSpec:
    """Conjugate the IFS by the homothety x -> (x - (h, v)) / diam(Q), sending Q to a
    rectangle of diameter one at the origin."""

    scale = normalizing_scale(spec)
    h, v = spec.q.xmin, spec.q.ymin
    maps = [AffineMap2D(m.a1,
                        m.a2,
                        scale * (m.b1 + m.a1 * h - h),
                        scale * (m.b2 + m.a2 * v - v))
            for m in spec.maps]
    return validate_carpet(maps, certification_depth=spec.delta_bounds.depth or None)


def unit_frame(spec: CarpetSpec) -> CarpetSpec:
    """Conjugate the IFS so that Q sits in [0, 1]^2 with its longer side of length one."""

    side = max(spec.q.width, spec.q.height)
    if side == 0:
        raise PreconditionError("cannot frame a carpet whose bounding rectangle is a point")
    h, v = spec.q.xmin, spec.q.ymin
    if h == 0 and v == 0 and side == 1:
        return spec
    maps = [AffineMap2D(m.a1,
                        m.a2,
                        (m.b1 + m.a1 * h - h) / side,
                        (m.b2 + m.a2 * v - v) / side)
            for m in spec.maps]
    return validate_carpet(maps, certification_depth=spec.delta_bounds.depth or None)
