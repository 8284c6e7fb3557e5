"""Interval-coverage toy problems: analytic optima, coverage, similarity.

Two stations sit at fixed positions inside the unit interval; the task is to
cover the interval with the smallest total station radius.  The optimum has a
closed form, which makes the family a convenient sandbox for the optimum
coverage and similarity-distribution concepts.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .similarity import HistogramEstimate, estimate_density, similarity

COVERAGE_TOL = 1e-12


@dataclass(frozen=True)
class IntervalTask:
    """Station locations (l1, l2) inside [0, 1]."""

    l1: float
    l2: float

    def __post_init__(self) -> None:
        for v in (self.l1, self.l2):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"station location {v} outside [0, 1]")

    @property
    def stations(self) -> tuple[float, float]:
        return (self.l1, self.l2)


@dataclass(frozen=True)
class DecisionSpace:
    """Box of feasible radius pairs, [0, u1] x [0, u2]."""

    upper: tuple[float, float]

    def __post_init__(self) -> None:
        u1, u2 = self.upper
        if u1 <= 0 or u2 <= 0:
            raise ValueError(f"space bounds must be positive, got {self.upper}")

    @classmethod
    def square(cls, u: float) -> "DecisionSpace":
        return cls((float(u), float(u)))


def default_spaces() -> tuple[DecisionSpace, DecisionSpace, DecisionSpace]:
    """Three nested spaces reproducing the shrinking-coverage ordering."""
    return (DecisionSpace.square(1.0), DecisionSpace.square(1.4), DecisionSpace.square(6.0))


class FeatureKind(Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class FeatureDistribution:
    """Distribution of station-location feature vectors over [0, 1]^2."""

    kind: FeatureKind
    mean: tuple[float, float] = (0.5, 0.5)
    sigma: float = 0.15

    @classmethod
    def uniform(cls) -> "FeatureDistribution":
        return cls(FeatureKind.UNIFORM)

    @classmethod
    def gaussian(cls, mean=(0.5, 0.5), sigma: float = 0.15) -> "FeatureDistribution":
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        return cls(FeatureKind.GAUSSIAN, (float(mean[0]), float(mean[1])), float(sigma))

    @classmethod
    def parse(cls, name: str) -> "FeatureDistribution":
        key = name.strip().lower()
        if key == "uniform":
            return cls.uniform()
        if key == "gaussian":
            return cls.gaussian()
        raise ValueError(f"unknown feature distribution {name!r}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n feature vectors in [0, 1]^2; the Gaussian is truncated by rejection."""
        if self.kind is FeatureKind.UNIFORM:
            return rng.random((n, 2))
        out = np.empty((0, 2))
        while out.shape[0] < n:
            batch = self.mean + self.sigma * rng.standard_normal((max(n, 64), 2))
            keep = batch[np.all((batch >= 0.0) & (batch <= 1.0), axis=1)]
            out = np.vstack([out, keep])
        return out[:n]


def covers_interval(l1: float, x1: float, l2: float, x2: float, tol: float = 0.0) -> bool:
    """True when [l1 - x1, l1 + x1] union [l2 - x2, l2 + x2] covers [0, 1]."""
    a1, a2 = l1 - x1, l1 + x1
    b1, b2 = l2 - x2, l2 + x2
    return bool(
        (a1 <= tol and a2 >= 1.0 - tol)
        or (b1 <= tol and b2 >= 1.0 - tol)
        or (a1 <= tol and b2 >= 1.0 - tol and b1 <= a2 + tol)
        or (b1 <= tol and a2 >= 1.0 - tol and a1 <= b2 + tol)
    )


def solve(task: IntervalTask) -> tuple[float, float]:
    """Minimal-total-radius cover: closed form over the three configurations.

    Either one station covers the interval alone, or the two split it.  Ties
    are broken by the most balanced radii, then by the larger first radius,
    so segments of equally good optima resolve deterministically.
    """
    l1, l2 = task.stations
    swapped = l1 > l2
    if swapped:
        l1, l2 = l2, l1

    joint = max(l1 + 1.0 - l2, l2 - l1)
    solo1 = max(l1, 1.0 - l1)
    solo2 = max(l2, 1.0 - l2)
    best = min(joint, solo1, solo2)

    candidates = []
    if joint == best:
        lo, hi = l1, joint - (1.0 - l2)
        x1 = min(max(joint / 2.0, lo), hi)
        candidates.append((x1, joint - x1))
    if solo1 == best:
        candidates.append((solo1, 0.0))
    if solo2 == best:
        candidates.append((0.0, solo2))
    x1, x2 = min(candidates, key=lambda c: (abs(c[0] - c[1]), -c[0]))

    if swapped:
        x1, x2 = x2, x1
    if not covers_interval(task.l1, x1, task.l2, x2, COVERAGE_TOL):
        raise AssertionError(f"solver produced an infeasible cover for {task}")
    return (x1, x2)


@dataclass(frozen=True)
class CoverageResult:
    """Monte-Carlo optimum coverage of a decision space."""

    gamma: float
    occupied_cells: int
    total_cells: int
    outside: int  # optima falling outside the space, counted against no cell
    samples: int
    grid: int


def optimum_coverage(
    space: DecisionSpace,
    samples: int,
    grid: int,
    dist: FeatureDistribution,
    seed: int,
) -> CoverageResult:
    """Fraction of grid cells occupied by the optima of sampled tasks."""
    if grid < 10:
        raise ValueError(f"grid must be at least 10, got {grid}")
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    rng = np.random.default_rng(seed)
    features = dist.sample(samples, rng)
    optima = np.array([solve(IntervalTask(l1, l2)) for l1, l2 in features])
    upper = np.asarray(space.upper)
    inside = np.all(optima <= upper, axis=1)
    outside = int(np.sum(~inside))
    cells = np.minimum((optima[inside] / upper * grid).astype(int), grid - 1)
    occupied = len(np.unique(cells[:, 0] * grid + cells[:, 1])) if cells.size else 0
    total = grid * grid
    return CoverageResult(occupied / total, occupied, total, outside, samples, grid)


def toy_similarity_experiment(
    k: int,
    dist: FeatureDistribution,
    seed: int,
    bins: int = 20,
    space: DecisionSpace | None = None,
) -> HistogramEstimate:
    """Similarity distribution of k solved source tasks against one target task.

    Tasks are sampled from the feature distribution, solved analytically, and
    their optima normalized into the decision space before the Chebyshev
    similarities are histogrammed.
    """
    sims = toy_similarities(k, dist, seed, space)
    return estimate_density(sims, bins)


def toy_similarities(
    k: int,
    dist: FeatureDistribution,
    seed: int,
    space: DecisionSpace | None = None,
) -> np.ndarray:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    space = space or default_spaces()[1]
    rng = np.random.default_rng(seed)
    features = dist.sample(k + 1, rng)
    optima = np.array([solve(IntervalTask(l1, l2)) for l1, l2 in features])
    normalized = optima / np.asarray(space.upper)
    if np.any(normalized > 1.0):
        raise ValueError("an optimum falls outside the decision space")
    target = normalized[k]
    return np.array([similarity(normalized[i], target) for i in range(k)])
