"""
scales.py

Scale indices of a carpet and the verification of their sandwich and ratio bounds.

For a scale t and an infinite word i:

- n_star(t) is the least n with alpha_bar^n < t,
- n_lower_star(t) is the largest n with alpha_under^n * delta > t,
- n(i, t) is the largest n such that every level-n cylinder other than i|n avoids the
  closed ball B(pi(i), t).

n(i, t) is decided level by level with a pruned descent around pi(i). At each level the
other cylinders whose rectangles reach the ball are refined cert_depth more levels:
they avoid the ball when no refined rectangle reaches it, and they meet it when a
point of E inside a refined cylinder lies in the ball.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
import numpy as np
from carpet_lab.errors import DepthBudgetExceededError
from carpet_lab.errors import EmptyIndexSetError
from carpet_lab.errors import PreconditionError
from carpet_lab.errors import ScaleOutOfRangeError
from carpet_lab.errors import UndecidableError
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import InfiniteWord
from carpet_lab.ifs_core import compose
from carpet_lab.ifs_core import compose_arrays
from carpet_lab.ifs_core import local_cylinders
from carpet_lab.ifs_core import normalize
from carpet_lab.ifs_core import points_of
from carpet_lab.ifs_core import rect_point_distances
from carpet_lab.ifs_core import rects_of
from carpet_lab.ifs_core import to_exact
from carpet_lab.ifs_core import word_budget

logger = logging.getLogger('root')

DEFAULT_CERT_DEPTH = 6
DECISION_SLACK = 1e-12


class _Decision(Enum):
    HOLDS = 'holds'
    FAILS = 'fails'
    UNDECIDED = 'undecided'


@dataclass(frozen=True)
class ScaleIndex:
    """n(i, t) as a certified value, or the undecided range [lower, upper]."""

    value: int | None
    lower: int
    upper: int
    out_of_regime: bool = False

    @property
    def certified(self) -> bool:
        return self.value is not None

    def require(self) -> int:
        if self.value is None:
            raise UndecidableError(
                f"n(i, t) only known to lie in [{self.lower}, {self.upper}]; raise the certification depth")
        return self.value


@dataclass(frozen=True)
class ScaleReport:
    """One verified (word, scale) sample."""

    t: float
    prefix: str
    n_lower: int
    n_exact: int | None
    n_upper: int
    ratio: float | None
    lo_bound: float
    hi_bound: float
    passed: bool
    certified: bool

    def to_row(self) -> dict:
        return {
            't': self.t,
            'prefix': self.prefix,
            'n_lower': self.n_lower,
            'n_exact': '' if self.n_exact is None else self.n_exact,
            'n_upper': self.n_upper,
            'ratio': '' if self.ratio is None else self.ratio,
            'lo_bound': self.lo_bound,
            'hi_bound': self.hi_bound,
            'pass': str(self.passed).lower()
        }


def _check_scale(t) -> Fraction:
    if not 0 < t < 1:
        raise ScaleOutOfRangeError(f"scale must lie in (0, 1), got {t}")
    return to_exact(t)


def n_star(spec: CarpetSpec, t) -> int:
    """min{n >= 1 : alpha_bar^n < t}."""

    t = _check_scale(t)
    n = 1
    while spec.alpha_bar ** n >= t:
        n += 1
    return n


def n_lower_star(spec: CarpetSpec, t, delta=None) -> int:
    """max{n >= 1 : alpha_under^n * delta > t}, with the certified lower separation by default."""

    t = _check_scale(t)
    delta = to_exact(spec.delta_lo if delta is None else delta)
    first = spec.alpha_under * delta
    if first <= t:
        raise EmptyIndexSetError(
            f"no n with alpha_under^n * delta > {float(t)} (alpha_under * delta = {float(first)})")
    n = 1
    while spec.alpha_under ** (n + 1) * delta > t:
        n += 1
    return n


def _decide(spec: CarpetSpec,
            others: np.ndarray,
            center: tuple[float, float],
            t: float,
            cert_depth: int,
            budget: int) -> _Decision:
    if len(others) == 0:
        return _Decision.HOLDS
    refined = local_cylinders(spec, center, t + DECISION_SLACK, cert_depth, root=others, budget=budget)
    if len(refined) == 0:
        return _Decision.HOLDS
    points = points_of(refined, spec.anchor)
    if np.any(np.hypot(points[:, 0] - center[0], points[:, 1] - center[1]) <= t - DECISION_SLACK):
        return _Decision.FAILS
    return _Decision.UNDECIDED


def n_of(spec: CarpetSpec,
         word: InfiniteWord,
         t,
         cert_depth: int = DEFAULT_CERT_DEPTH,
         budget: int | None = None) -> ScaleIndex:
    """The scale index n(i, t) of an eventually periodic word."""

    _check_scale(t)
    budget = word_budget() if budget is None else budget
    t = float(t)
    center = tuple(float(c) for c in word.point(spec))
    cap = n_star(spec, t) + 2
    base = spec.map_array()
    symbols = np.arange(1, spec.n_maps + 1)

    maps = np.array([[1.0, 1.0, 0.0, 0.0]])
    on_path = np.array([True])
    lower, first_fail = 0, None
    for n in range(1, cap + 1):
        maps = compose_arrays(maps, base)
        on_path = np.repeat(on_path, spec.n_maps) & (np.tile(symbols, len(on_path)) == word.symbol(n - 1))
        near = rect_point_distances(rects_of(maps, spec.q), center) <= t + DECISION_SLACK
        maps, on_path = maps[near], on_path[near]
        if len(maps) > budget:
            raise DepthBudgetExceededError(
                f"{len(maps)} cylinders near the ball at level {n} exceed the budget of {budget}")
        decision = _decide(spec, maps[~on_path], center, t, cert_depth, budget)
        logger.debug('n(%s, %s): level %s %s', word, t, n, decision.value)
        if decision is _Decision.HOLDS:
            lower = n
        elif decision is _Decision.FAILS:
            first_fail = n
            break

    upper = cap if first_fail is None else first_fail - 1
    if first_fail == 1:
        return ScaleIndex(0, 0, 0, out_of_regime=True)
    if lower == upper:
        return ScaleIndex(lower, lower, upper)
    return ScaleIndex(None, lower, upper)


def word_ratio(spec: CarpetSpec, word: InfiniteWord, n: int) -> Fraction:
    """alpha_2 of the truncation i|n."""

    return compose(spec, word.truncate(n)).alpha2


def sample_schedule(spec: CarpetSpec,
                    count: int,
                    t_range: tuple[float, float] | None = None,
                    seed: int = 0,
                    prefix_length: int = 8,
                    edge_cases: bool = True) -> list[tuple[InfiniteWord, float]]:
    """Random eventually periodic words with log-uniform scales.

    With edge_cases the scales just below and above alpha_under * delta_lo are appended.
    """

    rng = np.random.default_rng(seed)
    threshold = float(spec.alpha_under) * float(spec.delta_lo)
    if t_range is None:
        t_range = (threshold * float(spec.alpha_under) ** 3, min(0.5, 4 * threshold))
    lo, hi = t_range
    if not 0 < lo <= hi < 1:
        raise ScaleOutOfRangeError(f"invalid scale range {t_range}")

    samples = []
    for _ in range(count):
        prefix = tuple(int(s) for s in rng.integers(1, spec.n_maps + 1, size=prefix_length))
        cycle = tuple(int(s) for s in rng.integers(1, spec.n_maps + 1, size=int(rng.integers(1, 4))))
        t = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        samples.append((InfiniteWord(prefix, cycle), t))
    if edge_cases and 0 < threshold < 1:
        for factor in (1 - 1e-6, 1 + 1e-6):
            if factor * threshold < 1:
                samples.append((InfiniteWord((1,), (1,)), threshold * factor))
    return samples


def verify_littlethings(spec: CarpetSpec,
                        samples: list[tuple[InfiniteWord, float]],
                        cert_depth: int = DEFAULT_CERT_DEPTH,
                        delta_scale=1) -> list[ScaleReport]:
    """Check n_lower_star <= n(i, t) <= n_star and alpha_under t <= alpha_2(i|n) <= t / delta.

    Runs on the carpet normalized to diameter one. delta_scale multiplies the certified
    separation and exists to inject failures.
    """

    if not spec.ssc_certified:
        raise PreconditionError("scale verification needs a certified strong separation condition")
    if spec.diam_q > 1 + 1e-9:
        spec = normalize(spec)
        if not spec.ssc_certified:
            raise PreconditionError("strong separation not certified on the normalized carpet")
    delta = to_exact(spec.delta_lo) * to_exact(delta_scale)

    reports = []
    for word, t in samples:
        n_upper = n_star(spec, t)
        try:
            n_lower = n_lower_star(spec, t, delta)
        except EmptyIndexSetError:
            n_lower = 0
        index = n_of(spec, word, t, cert_depth)
        lo_bound = float(spec.alpha_under) * t
        hi_bound = t / float(delta)
        if index.out_of_regime:
            ratio = None
            passed = n_lower == 0
        elif index.certified:
            ratio = float(word_ratio(spec, word, index.value))
            passed = (n_lower <= index.value <= n_upper
                      and lo_bound <= ratio <= hi_bound)
        else:
            ratio = None
            passed = n_lower <= index.upper and index.lower <= n_upper
        logger.debug('scale sample %s t=%s: n in [%s, %s], passed=%s',
                     word, t, index.lower, index.upper, passed)
        reports.append(ScaleReport(t=t,
                                   prefix=str(word),
                                   n_lower=n_lower,
                                   n_exact=index.value,
                                   n_upper=n_upper,
                                   ratio=ratio,
                                   lo_bound=lo_bound,
                                   hi_bound=hi_bound,
                                   passed=passed,
                                   certified=index.certified))
    return reports
