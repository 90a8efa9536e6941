"""Rank-based comparison of several samples: Kruskal-Wallis omnibus test and
Conover-Iman pairwise post-hoc test, with the chi-square and Student-t tail
probabilities computed from incomplete gamma and beta functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ALPHA = 0.05
_EPS = 1e-16
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by a Lentz continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def chi2_sf(x: float, df: float) -> float:
    return gammaincc(0.5 * df, 0.5 * x)


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _beta_cf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t * t))


def rankdata(values) -> np.ndarray:
    """1-based ranks with ties given the mean of the ranks they span."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _pooled(groups: Sequence[Sequence[float]]):
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    arrs = [np.asarray(g, dtype=float).ravel() for g in groups]
    if any(len(a) == 0 for a in arrs):
        raise ValueError("every group must be nonempty")
    pooled = np.concatenate(arrs)
    if not np.isfinite(pooled).all():
        raise ValueError("samples must be finite")
    ranks = rankdata(pooled)
    sizes = np.array([len(a) for a in arrs])
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    mean_ranks = np.array([ranks[bounds[i]:bounds[i + 1]].mean() for i in range(len(arrs))])
    return pooled, ranks, sizes, mean_ranks


def _tie_factor(pooled: np.ndarray) -> float:
    n = len(pooled)
    _, counts = np.unique(pooled, return_counts=True)
    return 1.0 - float((counts ** 3 - counts).sum()) / (n ** 3 - n) if n > 1 else 0.0


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Tie-corrected Kruskal-Wallis H and its chi-square (k - 1 df) p-value."""
    pooled, _, sizes, mean_ranks = _pooled(groups)
    n = len(pooled)
    tie = _tie_factor(pooled)
    if tie <= 0:
        return 0.0, 1.0
    h = 12.0 / (n * (n + 1)) * float((sizes * (mean_ranks - (n + 1) / 2.0) ** 2).sum()) / tie
    return h, min(1.0, max(0.0, chi2_sf(h, len(sizes) - 1)))


def conover_statistics(groups: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise Conover-Iman t statistics and two-sided p-values (no correction).

    Both matrices are symmetric in magnitude; ``t[a, b]`` is signed by
    ``mean_rank[a] - mean_rank[b]``. Diagonals are 0 and 1.
    """
    pooled, ranks, sizes, mean_ranks = _pooled(groups)
    n, k = len(pooled), len(sizes)
    if n <= k:
        raise ValueError("need more observations than groups")
    h, _ = kruskal_wallis(groups)
    s2 = (float((ranks ** 2).sum()) - n * (n + 1) ** 2 / 4.0) / (n - 1)
    t = np.zeros((k, k))
    p = np.ones((k, k))
    if s2 <= 0:
        return t, p
    scale = s2 * (n - 1 - h) / (n - k)
    for a in range(k):
        for b in range(a + 1, k):
            diff = mean_ranks[a] - mean_ranks[b]
            den = math.sqrt(max(scale, 0.0) * (1.0 / sizes[a] + 1.0 / sizes[b]))
            if den == 0:
                tv = 0.0 if diff == 0 else math.copysign(math.inf, diff)
            else:
                tv = diff / den
            pv = min(1.0, max(0.0, t_sf_two_sided(abs(tv), n - k)))
            t[a, b], t[b, a] = tv, -tv
            p[a, b] = p[b, a] = pv
    return t, p


def conover_posthoc(groups: Sequence[Sequence[float]]) -> np.ndarray:
    return conover_statistics(groups)[1]


@dataclass(frozen=True)
class StatResult:
    metric: str
    groups: tuple[str, ...]
    h: float
    p_omnibus: float
    pairwise_p: np.ndarray
    alpha: float = ALPHA

    def best_significant(self, means: Sequence[float]) -> int | None:
        """Index of the group with the lowest mean if it beats every other at alpha."""
        if len(self.groups) < 2:
            return None
        best = int(np.argmin(means))
        others = [j for j in range(len(self.groups)) if j != best]
        if all(self.pairwise_p[best, j] < self.alpha for j in others) and all(
                means[best] < means[j] for j in others):
            return best
        return None


def compare(metric: str, names: Sequence[str], groups: Sequence[Sequence[float]],
            alpha: float = ALPHA) -> StatResult:
    h, p = kruskal_wallis(groups)
    return StatResult(metric, tuple(names), h, p, conover_posthoc(groups), alpha)
