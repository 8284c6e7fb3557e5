"""Rank statistics: Wilcoxon rank-sum test, ranking groups, rank correlation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EXACT_MAX_N = 20  # combined sample size limit for the exact null distribution


@dataclass(frozen=True)
class TestResult:
    statistic: float  # Mann-Whitney U of the first sample
    p_value: float
    method: str  # "exact" or "normal_approx"
    significant: bool


def _rankdata(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_rank_sum_counts(n: int, n1: int) -> np.ndarray:
    """Number of n1-subsets of ranks {1..n} per rank-sum value (index = sum)."""
    max_sum = n * (n + 1) // 2
    counts = np.zeros((n1 + 1, max_sum + 1), dtype=np.int64)
    counts[0, 0] = 1
    for rank in range(1, n + 1):
        for size in range(min(rank, n1), 0, -1):
            counts[size, rank:] += counts[size - 1, : max_sum + 1 - rank]
    return counts[n1]


def _normal_sf(z: float) -> float:
    return math.erfc(z / math.sqrt(2.0)) / 2.0


def wilcoxon_rank_sum(a, b, alpha: float = 0.05) -> TestResult:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) test.

    The null distribution is enumerated exactly when the pooled sample has at
    most EXACT_MAX_N tie-free observations; otherwise a tie-corrected,
    continuity-corrected normal approximation is used.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    n1, n2 = a.size, b.size
    n = n1 + n2
    pooled = np.concatenate([a, b])
    has_ties = len(np.unique(pooled)) < n

    ranks = _rankdata(pooled)
    rank_sum_a = float(np.sum(ranks[:n1]))
    u_stat = rank_sum_a - n1 * (n1 + 1) / 2.0

    if n <= EXACT_MAX_N and not has_ties:
        counts = _exact_rank_sum_counts(n, n1)
        w = int(round(rank_sum_a))
        total = int(counts.sum())
        count_le = int(counts[: w + 1].sum())
        count_ge = int(counts[w:].sum())
        numerator = min(2 * min(count_le, count_ge), total)
        p = numerator / total
        return TestResult(u_stat, p, "exact", p < alpha)

    mean_u = n1 * n2 / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts))
    var_u = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var_u <= 0.0:
        return TestResult(u_stat, 1.0, "normal_approx", False)
    z = max(abs(u_stat - mean_u) - 0.5, 0.0) / math.sqrt(var_u)
    p = min(2.0 * _normal_sf(z), 1.0)
    return TestResult(u_stat, p, "normal_approx", p < alpha)


@dataclass(frozen=True)
class RankingReport:
    """Algorithms ordered by median objective, chained into statistical ties.

    A new group starts whenever an adjacent pair differs significantly at the
    chosen level; within a group every adjacent pair has p >= alpha.
    """

    order: tuple[str, ...]
    medians: tuple[float, ...]
    group_ids: tuple[int, ...]
    adjacent_p: tuple[float, ...]  # p-value against the previous algorithm
    alpha: float

    @property
    def groups(self) -> list[list[str]]:
        out: list[list[str]] = []
        for name, gid in zip(self.order, self.group_ids):
            if len(out) == gid:
                out.append([])
            out[gid].append(name)
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", "algorithm", "median", "group_id"])
            for rank, (name, med, gid) in enumerate(
                zip(self.order, self.medians, self.group_ids), start=1
            ):
                writer.writerow([rank, name, repr(float(med)), gid])


def ranking_groups(samples, alpha: float = 0.05) -> RankingReport:
    """Rank algorithms by median final objective and group statistical ties.

    ``samples`` maps algorithm name to its final-objective sample (dict or
    sequence of pairs); insertion order breaks median ties deterministically.
    """
    items = list(samples.items()) if hasattr(samples, "items") else list(samples)
    if len(items) < 2:
        raise ValueError("ranking needs at least two algorithms")
    names = [name for name, _ in items]
    data = {name: np.asarray(vals, dtype=float) for name, vals in items}
    medians = {name: float(np.median(data[name])) for name in names}
    order = sorted(names, key=lambda name: (medians[name], names.index(name)))

    group_ids = [0]
    adjacent_p = [math.nan]
    for prev, cur in zip(order, order[1:]):
        result = wilcoxon_rank_sum(data[prev], data[cur], alpha)
        adjacent_p.append(result.p_value)
        group_ids.append(group_ids[-1] + 1 if result.p_value < alpha else group_ids[-1])
    return RankingReport(
        order=tuple(order),
        medians=tuple(medians[name] for name in order),
        group_ids=tuple(group_ids),
        adjacent_p=tuple(adjacent_p),
        alpha=alpha,
    )


def spearman(a, b) -> float:
    """Spearman rank correlation with average ranks; 0 for constant input.

    Tie-free input uses the exact rank-difference identity so perfect
    agreement and perfect reversal come out as exactly +-1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be equal-length vectors")
    n = a.size
    if n < 2:
        raise ValueError("need at least two observations")
    ra, rb = _rankdata(a), _rankdata(b)
    sa, sb = np.std(ra), np.std(rb)
    if sa == 0.0 or sb == 0.0:
        return 0.0
    if len(np.unique(a)) == n and len(np.unique(b)) == n:
        d2 = int(np.sum((ra.astype(int) - rb.astype(int)) ** 2))
        return 1.0 - 6.0 * d2 / (n * (n * n - 1))
    return float(np.mean((ra - np.mean(ra)) * (rb - np.mean(rb))) / (sa * sb))
