"""
tangents.py

Finite-scale views of weak tangents of a horizontal carpet.

- analyze_endings lists the abscissae of the vertical sides ("horizontal endings") of the
  level-K construction rectangles and the scale below which a ball meets at most one
  ending line of the level n(i, t) + K rectangles inside Q_{i|t}.
- rescale_window samples ((E - p) / t) inside B(0, R).
- fit_product_form fits (-inf, w] x C_left U [w, inf) x C_right to a rescaled cloud.
- verify_epspatterns checks that E inside B(x, t) is within t * alpha_bar^K / delta of
  (-inf, w] x V_u(E) U [w, inf) x V_v(E) for some u < w < v.

When every vertical line through Q meets E (H2), each construction rectangle is within
its height of its cylinder, so samples are taken along rectangle midlines. Otherwise one
point of E per cylinder is used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np
from scipy.spatial import cKDTree
from carpet_lab.conditions import check_H1
from carpet_lab.conditions import check_H2
from carpet_lab.conditions import slice_conditions_hold
from carpet_lab.errors import EmptyCloudError
from carpet_lab.errors import EmptyIntersectionError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ResolutionTooCoarseError
from carpet_lab.errors import ScaleOutOfRangeError
from carpet_lab.errors import ScalingBelowOneError
from carpet_lab.errors import UncertifiedHullError
from carpet_lab.geometry import PointSet2D
from carpet_lab.geometry import vertical_slice
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import EXACT_PAIR_LIMIT
from carpet_lab.ifs_core import InfiniteWord
from carpet_lab.ifs_core import Rect
from carpet_lab.ifs_core import check_budget
from carpet_lab.ifs_core import compose
from carpet_lab.ifs_core import level_rects
from carpet_lab.ifs_core import level_rects_exact
from carpet_lab.ifs_core import local_cylinders
from carpet_lab.ifs_core import normalize
from carpet_lab.ifs_core import points_of
from carpet_lab.ifs_core import rects_of
from carpet_lab.intervals import IntervalUnion1D
from carpet_lab.scales import DEFAULT_CERT_DEPTH
from carpet_lab.scales import n_of

logger = logging.getLogger('root')

ENDING_TOLERANCE = 1e-12
MAX_W_CANDIDATES = 64
UV_CANDIDATES = 32
PAIR_BUDGET = 128
FILL_FRACTION = 1 / 400
MAX_WINDOW_DEPTH = 40


@dataclass(frozen=True)
class Window:
    """Ball B(center, radius * t) viewed at scale t."""

    center: tuple[float, float]
    t: float
    radius: float = 1.0
    word: InfiniteWord | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'center', (float(self.center[0]), float(self.center[1])))
        if self.t <= 0:
            raise ScaleOutOfRangeError(f"window scale must be positive, got {self.t}")
        if self.radius < 1:
            raise ValueError(f"window radius must be at least 1, got {self.radius}")


@dataclass(frozen=True)
class TangentCloud:
    """Points of (E - center) / t inside B(0, R) and their rescaled resolution."""

    points: np.ndarray
    resolution: float
    radius: float

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ProductForm:
    """(-inf, w] x c_left U [w, inf) x c_right with its residual inside B(0, R)."""

    w: float
    c_left: IntervalUnion1D
    c_right: IntervalUnion1D
    residual: float

    def __post_init__(self) -> None:
        if self.c_left.is_empty() and self.c_right.is_empty():
            raise ValueError("a product form needs a nonempty side")


@dataclass(frozen=True)
class EndingAnalysis:
    K: int
    delta_K: float
    t_K: float
    ending_abscissae: tuple
    degenerate: bool
    n_required: int


@dataclass(frozen=True)
class EpsPatternReport:
    """Outcome of the slice-product approximation in one ball."""

    center: tuple[float, float]
    t: float
    K: int
    n: int
    w: float
    u: float
    v: float
    ending_count: int
    degenerate: bool
    cover_residual: float
    measured_residual: float
    bound: float
    slack: float
    within_threshold: bool
    c_left: IntervalUnion1D
    c_right: IntervalUnion1D

    @property
    def passed(self) -> bool:
        return (self.cover_residual <= self.bound
                and self.measured_residual <= self.bound + self.slack
                and (self.ending_count <= 1 or not self.within_threshold))

    def to_json(self) -> dict:
        return {
            'center': list(self.center),
            't': self.t,
            'K': self.K,
            'n': self.n,
            'w': self.w,
            'u': self.u,
            'v': self.v,
            'residual': self.measured_residual,
            'cover_residual': self.cover_residual,
            'bound': self.bound,
            'within_threshold': self.within_threshold,
            'pass': self.passed,
            'c_left': [list(row) for row in self.c_left.to_rows()],
            'c_right': [list(row) for row in self.c_right.to_rows()]
        }


def _distinct(values: list, tolerance) -> list:
    result: list = []
    for value in sorted(values):
        if not result or value - result[-1] > tolerance:
            result.append(value)
    return result


def analyze_endings(spec: CarpetSpec, K: int) -> EndingAnalysis:
    """Ending abscissae of the level-K rectangles, their least positive gap and t_K."""

    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    check_budget(spec.n_maps, K)
    if spec.n_maps ** K <= EXACT_PAIR_LIMIT:
        rects = level_rects_exact(spec, K)
        endings = _distinct([e for r in rects for e in (r.xmin, r.xmax)], 0)
    else:
        rows = level_rects(spec, K)
        endings = _distinct(rows[:, 0:2].ravel().tolist(), ENDING_TOLERANCE)

    degenerate = len(endings) < 2
    delta_K = 0.0 if degenerate else float(min(b - a for a, b in zip(endings, endings[1:])))
    beta = float(spec.beta)
    alpha_under = float(spec.alpha_under)
    if degenerate or beta >= 1 or spec.delta_lo <= 0:
        n_required, t_K = 0, 0.0
    else:
        n_required = max(1, math.ceil(math.log(3 / (delta_K * alpha_under)) / math.log(1 / beta)))
        t_K = alpha_under ** n_required * float(spec.delta_lo)
    logger.debug('endings at level %s: %s, delta_K=%s, t_K=%s', K, len(endings), delta_K, t_K)
    return EndingAnalysis(K=K,
                          delta_K=delta_K,
                          t_K=t_K,
                          ending_abscissae=tuple(endings),
                          degenerate=degenerate,
                          n_required=n_required)


def _ending_lines(rects: np.ndarray, center: tuple[float, float], t: float) -> list[float]:
    """Distinct abscissae of rectangle sides meeting the closed ball."""

    cx, cy = center
    dy = np.maximum(0.0, np.maximum(rects[:, 2] - cy, cy - rects[:, 3]))
    hits = []
    for column in (0, 1):
        meets = np.hypot(rects[:, column] - cx, dy) <= t
        hits.extend(rects[meets, column].tolist())
    return _distinct(hits, ENDING_TOLERANCE * max(1.0, t))


def _subtree_rects(spec: CarpetSpec, word: InfiniteWord, n: int, K: int, t: float) -> np.ndarray:
    center = tuple(float(c) for c in word.point(spec))
    root = np.array([compose(spec, word.truncate(n)).as_row()])
    return rects_of(local_cylinders(spec, center, t, K, root=root), spec.q)


def endings_in_ball(spec: CarpetSpec,
                    word: InfiniteWord,
                    t: float,
                    K: int,
                    cert_depth: int = DEFAULT_CERT_DEPTH) -> list[float]:
    """Ending lines of the level n(i, t) + K rectangles inside Q_{i|t} meeting B(pi(i), t)."""

    n = n_of(spec, word, t, cert_depth).require()
    center = tuple(float(c) for c in word.point(spec))
    return _ending_lines(_subtree_rects(spec, word, n, K, t), center, t)


def _fills_segments(spec: CarpetSpec) -> bool:
    try:
        return check_H2(spec).holds
    except UncertifiedHullError:
        return False


def _window_points(spec: CarpetSpec,
                   center: tuple[float, float],
                   radius: float,
                   depth: int,
                   fill: bool,
                   spacing: float) -> tuple[np.ndarray, float]:
    """Points of E (to within the returned resolution) in the closed ball."""

    maps = local_cylinders(spec, center, radius, depth)
    if len(maps) == 0:
        return np.empty((0, 2)), 0.0
    if not fill:
        resolution = spec.diam_q * float(spec.alpha_bar) ** depth
        points = points_of(maps, spec.anchor)
    else:
        rects = rects_of(maps, spec.q)
        height = float((rects[:, 3] - rects[:, 2]).max())
        resolution = height + spacing / 2
        chunks = []
        for xmin, xmax, ymin, ymax in rects:
            count = int(math.ceil((xmax - xmin) / spacing)) + 1
            xs = np.linspace(xmin, xmax, num=count)
            chunks.append(np.stack([xs, np.full(count, (ymin + ymax) / 2)], axis=-1))
        points = np.concatenate(chunks)
    inside = np.hypot(points[:, 0] - center[0], points[:, 1] - center[1]) <= radius
    return points[inside], resolution


def _thin(points: np.ndarray, cell: float) -> np.ndarray:
    if len(points) == 0 or cell <= 0:
        return points
    _, keep = np.unique(np.floor(points / cell).astype(np.int64), axis=0, return_index=True)
    return points[np.sort(keep)]


def window_depth(spec: CarpetSpec, window: Window, fill: bool | None = None) -> int:
    """Least depth whose rescaled resolution is at most R / 100."""

    fill = _fills_segments(spec) if fill is None else fill
    target = window.radius * window.t
    for depth in range(MAX_WINDOW_DEPTH + 1):
        if fill:
            height = float(max(m.alpha2 for m in spec.maps)) ** depth * float(spec.q.height)
            if height <= target * FILL_FRACTION:
                return depth
        elif spec.diam_q * float(spec.alpha_bar) ** depth <= target / 200:
            return depth
    return MAX_WINDOW_DEPTH


def rescale_window(spec: CarpetSpec,
                   window: Window,
                   depth: int | None = None,
                   fill: bool | None = None) -> TangentCloud:
    """Sample of (E - center) / t inside B(0, R)."""

    if window.t >= spec.diam_q:
        raise ScaleOutOfRangeError(f"window scale {window.t} is not below diam(Q) = {spec.diam_q}")
    fill = _fills_segments(spec) if fill is None else fill
    depth = window_depth(spec, window, fill) if depth is None else depth
    absolute = window.radius * window.t
    spacing = absolute * FILL_FRACTION
    points, resolution = _window_points(spec, window.center, absolute, depth, fill, spacing)
    rescaled_resolution = resolution / window.t
    if rescaled_resolution > window.radius / 100:
        raise ResolutionTooCoarseError(
            f"depth {depth} gives rescaled resolution {rescaled_resolution} above R / 100")
    cloud = (points - np.asarray(window.center)) / window.t
    cell = rescaled_resolution / 2
    cloud = _thin(cloud, cell)
    logger.debug('window at %s, t=%s: %s points, depth %s', window.center, window.t, len(cloud), depth)
    return TangentCloud(cloud, rescaled_resolution + cell * math.sqrt(2), window.radius)


def _union_distance(values: np.ndarray, union: IntervalUnion1D) -> np.ndarray:
    """Distance from each value to the interval union."""

    if union.is_empty():
        return np.full(len(values), np.inf)
    rows = np.array(union.to_rows())
    lo, hi = rows[:, 0], rows[:, 1]
    index = np.searchsorted(lo, values, side='right') - 1
    clipped = np.clip(index, 0, len(lo) - 1)
    following = np.clip(index + 1, 0, len(lo) - 1)
    to_left = np.where(index < 0, np.inf, np.maximum(0.0, values - hi[clipped]))
    to_right = np.where(index + 1 < len(lo), lo[following] - values, np.inf)
    return np.minimum(to_left, to_right)


def _distance_to_model(points: np.ndarray,
                       w: float,
                       left: IntervalUnion1D,
                       right: IntervalUnion1D) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    to_left = np.hypot(np.maximum(0.0, x - w), _union_distance(y, left))
    to_right = np.hypot(np.maximum(0.0, w - x), _union_distance(y, right))
    return np.minimum(to_left, to_right)


def _model_grid(w: float,
                left: IntervalUnion1D,
                right: IntervalUnion1D,
                center: tuple[float, float],
                radius: float,
                spacing: float) -> np.ndarray:
    cx, cy = center
    parts = []
    for union, lo_x, hi_x in ((left, cx - radius, min(w, cx + radius)),
                              (right, max(w, cx - radius), cx + radius)):
        clipped = union.clip(cy - radius, cy + radius)
        if clipped.is_empty() or lo_x > hi_x:
            continue
        xs = np.unique(np.append(np.arange(lo_x, hi_x, spacing), hi_x))
        ys = np.unique(np.concatenate([np.append(np.arange(lo, hi, spacing), hi)
                                       for lo, hi in clipped.to_rows()]))
        grid_x, grid_y = np.meshgrid(xs, ys)
        parts.append(np.stack([grid_x.ravel(), grid_y.ravel()], axis=-1))
    if not parts:
        return np.empty((0, 2))
    grid = np.concatenate(parts)
    return grid[np.hypot(grid[:, 0] - cx, grid[:, 1] - cy) <= radius]


def model_residual(points: np.ndarray,
                   reference: np.ndarray,
                   w: float,
                   left: IntervalUnion1D,
                   right: IntervalUnion1D,
                   center: tuple[float, float],
                   radius: float,
                   spacing: float) -> float:
    """Hausdorff distance inside the ball between a sample and the product model.

    points are the sample inside the ball; reference is the sample inside a slightly
    larger ball, used as the target for model points near the boundary.
    """

    forward = float(_distance_to_model(points, w, left, right).max()) if len(points) else 0.0
    grid = _model_grid(w, left, right, center, radius, spacing)
    if len(grid) == 0:
        return forward if len(points) == 0 else math.inf
    if len(reference) == 0:
        return math.inf
    backward = float(cKDTree(reference).query(grid)[0].max())
    return max(forward, backward)


def _side_union(values: np.ndarray, resolution: float) -> IntervalUnion1D:
    return IntervalUnion1D.from_intervals(((y, y) for y in np.unique(values).tolist()), 2 * resolution)


def fit_product_form(cloud: TangentCloud, endings: list[float] | None = None) -> ProductForm:
    """Best (w, C_left, C_right) for the cloud, ties broken by the smallest |w|."""

    if len(cloud) == 0:
        raise EmptyCloudError("cannot fit a product form to an empty cloud")
    points = cloud.points
    radius = cloud.radius
    margin = 2 * cloud.resolution
    spacing = max(cloud.resolution, radius / 64)

    xs = np.unique(points[:, 0])
    if len(xs) > MAX_W_CANDIDATES:
        xs = np.quantile(xs, np.linspace(0, 1, MAX_W_CANDIDATES))
    candidates = sorted(set(xs.tolist()) | {-radius, 0.0, radius} | set(endings or ()))

    best: ProductForm | None = None
    for w in candidates:
        left = _side_union(points[points[:, 0] <= w - margin, 1], cloud.resolution)
        right = _side_union(points[points[:, 0] >= w + margin, 1], cloud.resolution)
        if left.is_empty() and right.is_empty():
            continue
        residual = model_residual(points, points, w, left, right, (0.0, 0.0), radius, spacing)
        if (best is None
                or residual < best.residual - 1e-12
                or abs(residual - best.residual) <= 1e-12 and abs(w) < abs(best.w)):
            best = ProductForm(w, left, right, residual)
    if best is None:
        raise EmptyCloudError("every candidate split leaves both sides empty")
    logger.debug('product form: w=%s, residual=%s', best.w, best.residual)
    return best


def verify_epspatterns(spec: CarpetSpec,
                       word: InfiniteWord,
                       t: float,
                       K: int,
                       slice_depth: int | None = None,
                       cert_depth: int = DEFAULT_CERT_DEPTH) -> EpsPatternReport:
    """Slice-product approximation of E in B(pi(i), t) against t * alpha_bar^K / delta.

    Runs on the carpet normalized to diameter one. The split w ranges over the ending lines
    meeting the ball and the abscissa of the center, each with up to UV_CANDIDATES pairs
    u < w < v and about PAIR_BUDGET pairs in total.
    """

    if not spec.ssc_certified:
        raise PreconditionError("slice products need a certified strong separation condition")
    if not check_H1(spec).holds or not slice_conditions_hold(spec):
        raise PreconditionError("slice products need H1 and H2 (or H2'')")
    if spec.diam_q > 1 + 1e-9:
        spec = normalize(spec)
    if not 0 < t < 1:
        raise ScaleOutOfRangeError(f"scale must lie in (0, 1), got {t}")

    endings = analyze_endings(spec, K)
    center = tuple(float(c) for c in word.point(spec))
    index = n_of(spec, word, t, cert_depth)
    n = index.require()
    rects = _subtree_rects(spec, word, n, K, t)
    lines = _ending_lines(rects, center, t)
    cover_residual = float((rects[:, 3] - rects[:, 2]).max()) if len(rects) else 0.0

    degenerate = not lines
    splits = _distinct(lines + [center[0]], ENDING_TOLERANCE * max(1.0, t))
    per_split = max(4, min(UV_CANDIDATES, PAIR_BUDGET // len(splits)))
    offsets = t * np.geomspace(1e-3, 0.999, num=per_split)
    candidates = []
    for w in splits:
        if degenerate:
            candidates.append((w, w, w))
        else:
            candidates.extend((w, w - d, w + d) for d in offsets.tolist())

    fill = _fills_segments(spec)
    window = Window(center, t, word=word)
    depth = window_depth(spec, window, fill) + 1
    slice_depth = depth if slice_depth is None else slice_depth
    spacing = t * FILL_FRACTION
    buffer = spec.diam_q * float(spec.alpha_bar) ** depth + spacing
    reference, resolution = _window_points(spec, center, t + buffer, depth, fill, spacing)
    inside = reference[np.hypot(reference[:, 0] - center[0], reference[:, 1] - center[1]) <= t]
    if len(inside) == 0:
        raise EmptyIntersectionError(f"no sample of E inside B({center}, {t})")
    slice_resolution = float(max(m.alpha2 for m in spec.maps)) ** slice_depth * float(spec.q.height)
    grid_spacing = max(resolution, t / 64)

    slices: dict[float, IntervalUnion1D] = {}

    def slice_at(x: float) -> IntervalUnion1D:
        if x not in slices:
            slices[x] = vertical_slice(spec, x, slice_depth)
        return slices[x]

    best = None
    for w, u, v in candidates:
        left, right = slice_at(u), slice_at(v)
        residual = model_residual(inside, reference, w, left, right, center, t, grid_spacing)
        if best is None or residual < best[0] - 1e-12:
            best = (residual, w, u, v, left, right)
    residual, w, u, v, left, right = best

    bound = t * float(spec.alpha_bar) ** K / float(spec.delta_lo)
    report = EpsPatternReport(center=center,
                              t=t,
                              K=K,
                              n=n,
                              w=w,
                              u=u,
                              v=v,
                              ending_count=len(lines),
                              degenerate=degenerate,
                              cover_residual=cover_residual,
                              measured_residual=residual,
                              bound=bound,
                              slack=2 * (resolution + slice_resolution + grid_spacing),
                              within_threshold=t < endings.t_K,
                              c_left=left.clip(center[1] - t, center[1] + t),
                              c_right=right.clip(center[1] - t, center[1] + t))
    logger.debug('slice product at %s, t=%s, K=%s: residual %s, bound %s', center, t, K, residual, bound)
    return report


def miniset(shape: PointSet2D, scaling: float, shift, q: Rect | None = None) -> PointSet2D:
    """(scaling * S + shift) clipped to Q (the unit square by default)."""

    if scaling < 1:
        raise ScalingBelowOneError(f"miniset scaling must be at least 1, got {scaling}")
    q = Rect(Fraction(0), Fraction(1), Fraction(0), Fraction(1)) if q is None else q
    xmin, xmax, ymin, ymax = q.as_floats()
    points = shape.points * scaling + np.asarray(shift, dtype=float)
    keep = ((points[:, 0] >= xmin) & (points[:, 0] <= xmax)
            & (points[:, 1] >= ymin) & (points[:, 1] <= ymax))
    return PointSet2D(points[keep], shape.resolution * scaling)


def spine_branch(spec: CarpetSpec, spine: int) -> int:
    """The map other than spine whose image starts nearest the middle of [h, h']."""

    middle = (spec.q.xmin + spec.q.xmax) / 2
    others = [i for i in range(1, spec.n_maps + 1) if i != spine]
    return min(others, key=lambda i: (abs(spec.maps[i - 1].image_x(spec.q.xmin, spec.q.xmax)[0] - middle), i))


def center_line_level(spec: CarpetSpec, t: float, spine: int = 1, radius: float = 1.0) -> int:
    """Level m of the spine rectangle Q_{spine^m} framing a window at scale t.

    The ball of radius radius * t must fit inside the half-width of the rectangle, and among
    those levels the one whose height is closest to t (on a log scale) is taken. Falls back
    to 0 when even Q is too narrow.
    """

    reach = radius * t
    width, height = float(spec.q.width), float(spec.q.height)
    best, m = 0, 0
    best_gap = math.inf
    while width / 2 >= reach:
        gap = abs(math.log(height / t))
        if gap < best_gap:
            best, best_gap = m, gap
        spine_map = spec.maps[spine - 1]
        width, height = width * float(spine_map.alpha1), height * float(spine_map.alpha2)
        m += 1
    return best


def center_line_windows(spec: CarpetSpec,
                        count: int,
                        spine: int = 1,
                        branch: int | None = None,
                        radius: float = 1.0) -> list[Window]:
    """Windows at scales alpha_bar^i centred at pi(spine^m branch spine spine ...).

    m is center_line_level(t_i), so the ball sits inside Q_{spine^m} and on carpets whose
    level-1 columns meet at the middle of Q it is split by the vertical center line of that
    rectangle, with rectangles of comparable height on both sides.
    """

    branch = spine_branch(spec, spine) if branch is None else branch
    windows = []
    for i in range(1, count + 1):
        t = float(spec.alpha_bar) ** i
        m = center_line_level(spec, t, spine, radius)
        word = InfiniteWord((spine,) * m + (branch,), (spine,))
        center = tuple(float(c) for c in word.point(spec))
        windows.append(Window(center, t, radius, word))
    return windows
