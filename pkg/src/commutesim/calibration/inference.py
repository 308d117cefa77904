"""Sample size and rank/contingency tests used to analyse the survey.

The statistics are computed here from ranks and counts; only the reference
distributions (chi-square, normal) come from SciPy.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import stats


class TestResult(NamedTuple):
    statistic: float
    pvalue: float


class ChiSquareResult(NamedTuple):
    statistic: float
    df: int
    pvalue: float


def cochran_sample_size(population: float, z: float = 1.96, margin: float = 0.05,
                        p: float = 0.5) -> int:
    """Cochran's sample size with finite-population correction, rounded up."""
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    if population < 1:
        raise ValueError("population must be >= 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    n0 = z * z * p * (1 - p) / (margin * margin)
    n = n0 / (1 + (n0 - 1) / population)
    # guard against 384.0000000001-style float noise before ceiling
    return max(1, math.ceil(round(n, 9)))


def _tie_term(ranked_values: np.ndarray) -> float:
    _, counts = np.unique(ranked_values, return_counts=True)
    return float(np.sum(counts ** 3 - counts))


def kruskal_wallis(*groups) -> TestResult:
    """Kruskal-Wallis H with tie correction; p from chi-square with k-1 df."""
    if len(groups) == 1 and not np.isscalar(groups[0][0]):
        groups = tuple(groups[0])
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise ValueError("every group must be non-empty")
    pooled = np.concatenate(groups)
    n = len(pooled)
    if n < 3:
        raise ValueError("need at least three observations in total")
    ranks = stats.rankdata(pooled)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + len(g)].sum()
        h += r * r / len(g)
        start += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    correction = 1.0 - _tie_term(pooled) / (n ** 3 - n)
    if correction <= 0:
        return TestResult(0.0, 1.0)
    h = max(h / correction, 0.0)
    return TestResult(h, float(stats.chi2.sf(h, len(groups) - 1)))


def mann_whitney_u(a, b, continuity: bool = True) -> TestResult:
    """Two-sided Mann-Whitney test; returns ``min(U_a, U_b)`` and a normal-approximation p.

    The variance carries the tie correction; ``continuity`` subtracts 0.5 from
    ``|U - mean|``.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = stats.rankdata(pooled)
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)
    n = n1 + n2
    mean = n1 * n2 / 2.0
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return TestResult(float(u), 1.0)
    dev = abs(u - mean)
    if continuity:
        dev = max(dev - 0.5, 0.0)
    p = 2.0 * stats.norm.sf(dev / math.sqrt(var))
    return TestResult(float(u), float(min(p, 1.0)))


def chi_square_independence(table) -> ChiSquareResult:
    """Pearson chi-square test of independence on an r x c table of counts (no Yates correction)."""
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or obs.shape[0] < 2 or obs.shape[1] < 2:
        raise ValueError("need at least a 2 x 2 table")
    if np.any(obs < 0):
        raise ValueError("counts must be non-negative")
    total = obs.sum()
    rows = obs.sum(axis=1, keepdims=True)
    cols = obs.sum(axis=0, keepdims=True)
    if np.any(rows == 0) or np.any(cols == 0):
        raise ValueError("a row or column total is zero")
    expected = rows * cols / total
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return ChiSquareResult(chi2, df, float(stats.chi2.sf(chi2, df)))


def crosstab(a, b, levels_a=None, levels_b=None) -> np.ndarray:
    """Counts of each (a, b) level pair; levels default to the sorted observed values."""
    a = np.asarray(a)
    b = np.asarray(b)
    la = np.unique(a) if levels_a is None else np.asarray(levels_a)
    lb = np.unique(b) if levels_b is None else np.asarray(levels_b)
    out = np.zeros((len(la), len(lb)), dtype=int)
    for i, x in enumerate(la):
        for j, y in enumerate(lb):
            out[i, j] = np.sum((a == x) & (b == y))
    return out
