"""Source-selection transfer algorithms over a knowledge base.

All nine algorithms share one protocol: evaluate the random initial
population, score every stored source (charging any target evaluations the
scoring needs to the shared budget), inject the best-scoring source's elite
solution in place of the worst initial individual, then continue with the
backbone EA on the remaining budget.  The no-transfer baseline skips the
selection entirely and the random baseline scores sources uniformly at
random.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .ea import EAConfig, RunResult, optimize
from .families import TaskInstance
from .generator import SearchRecord
from .seeds import rng_for
from .stats import spearman

OC_SAMPLE_SIZE = 10  # solutions probed on the target per source by OC / ROC
VARIANCE_FLOOR = 1e-12
SUBSPACE_MAX_DIRECTIONS = 5


class AlgorithmId(Enum):
    N = "N"  # no transfer
    R = "R"  # random source
    H = "H"  # hamming distance of threshold patterns
    E = "E"  # euclidean distance of elites
    KLD = "KLD"  # kullback-leibler divergence of cloud gaussians
    WD = "WD"  # wasserstein distance of cloud gaussians
    OC = "OC"  # ordinal correlation of probed fitness
    ROC = "ROC"  # relaxed ordinal correlation of probed fitness
    SA = "SA"  # subspace alignment of cloud principal directions


def parse_algorithms(text: str) -> list[AlgorithmId]:
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(AlgorithmId[token.upper()])
        except KeyError:
            raise ValueError(f"unknown algorithm {token!r}") from None
    if not out:
        raise ValueError("no algorithms given")
    return out


@dataclass
class SelectionOutcome:
    """Which source was chosen, with the per-source scores and the evaluations
    the scoring itself consumed (the injection evaluation is not included)."""

    chosen_source: int | None
    scores: np.ndarray | None
    extra_evals: int


def principal_directions(cloud: np.ndarray, p: int) -> tuple[np.ndarray, bool]:
    """Top-p orthonormal eigenvectors of the sample covariance, descending.

    Returns the (d, p) basis and a flag set when the cloud's covariance rank
    is below p, in which case the trailing directions are an arbitrary
    orthonormal completion.
    """
    cloud = np.asarray(cloud, dtype=float)
    if cloud.ndim != 2:
        raise ValueError("cloud must be a (n, d) matrix")
    n, d = cloud.shape
    if not 1 <= p <= d:
        raise ValueError(f"p must be in 1..{d}, got {p}")
    if n < p + 1:
        raise ValueError(f"cloud needs at least {p + 1} rows, got {n}")
    cov = np.atleast_2d(np.cov(cloud, rowvar=False, ddof=1))
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(eigval, kind="stable")[::-1]
    eigval, eigvec = eigval[order], eigvec[:, order]
    tol = max(float(eigval[0]), 0.0) * 1e-12
    deficient = bool(np.sum(eigval > tol) < p)
    return eigvec[:, :p], deficient


def _gaussian_moments(cloud: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = np.mean(cloud, axis=0)
    var = np.maximum(np.var(cloud, axis=0), VARIANCE_FLOOR)
    return mean, var


def _kl_gaussians(mu_s, var_s, mu_t, var_t) -> float:
    per_coord = 0.5 * (np.log(var_t / var_s) + (var_s + (mu_s - mu_t) ** 2) / var_t - 1.0)
    return float(np.sum(per_coord))


def _kendall_like(a: np.ndarray, b: np.ndarray) -> float:
    """(concordant - discordant) / total pairs; ties contribute zero."""
    m = len(a)
    total = m * (m - 1) // 2
    score = 0
    for i in range(m):
        score += int(np.sum(np.sign(a[i + 1 :] - a[i]) * np.sign(b[i + 1 :] - b[i])))
    return score / total


def compute_scores(
    algo: AlgorithmId,
    records: Sequence[SearchRecord],
    target_population: np.ndarray,
    target_fitness: np.ndarray,
    eval_fn: Callable[[np.ndarray], np.ndarray],
    rng: np.random.Generator,
    oc_samples: int = OC_SAMPLE_SIZE,
) -> np.ndarray:
    """Per-source scores for one selection method (higher is better).

    ``eval_fn`` evaluates solutions on the target task and charges the run
    budget; only OC and ROC use it.
    """
    k = len(records)
    if algo is AlgorithmId.R:
        return rng.random(k)
    incumbent = target_population[int(np.argmin(target_fitness))]
    d = target_population.shape[1]
    scores = np.empty(k)
    if algo in (AlgorithmId.KLD, AlgorithmId.WD):
        mu_t, var_t = _gaussian_moments(target_population)
    if algo is AlgorithmId.SA:
        p = min(d, SUBSPACE_MAX_DIRECTIONS)
        basis_t, _ = principal_directions(target_population, p)

    for i, record in enumerate(records):
        cloud = record.final_population
        if algo is AlgorithmId.H:
            elite_bits = record.best_solution >= 0.5
            incumbent_bits = incumbent >= 0.5
            scores[i] = -float(np.sum(elite_bits != incumbent_bits))
        elif algo is AlgorithmId.E:
            scores[i] = -float(np.linalg.norm(record.best_solution - incumbent))
        elif algo is AlgorithmId.KLD:
            mu_s, var_s = _gaussian_moments(cloud)
            scores[i] = -_kl_gaussians(mu_s, var_s, mu_t, var_t)
        elif algo is AlgorithmId.WD:
            mu_s, var_s = _gaussian_moments(cloud)
            w2 = np.sum((mu_s - mu_t) ** 2) + np.sum((np.sqrt(var_s) - np.sqrt(var_t)) ** 2)
            scores[i] = -float(w2)
        elif algo in (AlgorithmId.OC, AlgorithmId.ROC):
            m = min(oc_samples, cloud.shape[0])
            idx = rng.choice(cloud.shape[0], size=m, replace=False)
            source_fit = record.final_fitness[idx]
            target_fit = eval_fn(cloud[idx])
            if algo is AlgorithmId.OC:
                scores[i] = spearman(source_fit, target_fit)
            else:
                scores[i] = _kendall_like(source_fit, target_fit)
        elif algo is AlgorithmId.SA:
            basis_s, _ = principal_directions(cloud, p)
            scores[i] = float(np.linalg.norm(basis_s.T @ basis_t)) / np.sqrt(p)
        else:
            raise ValueError(f"no scores defined for algorithm {algo}")
    return scores


def run_sto(
    algo: AlgorithmId,
    target: TaskInstance,
    records: Sequence[SearchRecord],
    config: EAConfig,
    seed: int,
    oc_samples: int = OC_SAMPLE_SIZE,
) -> tuple[RunResult, SelectionOutcome]:
    """Run one transfer algorithm on the target task against a knowledge base.

    The backbone EA consumes the run seed directly, so the no-transfer
    baseline is bit-identical to a plain ``optimize`` call and every
    algorithm shares the same initial population per seed.  Selection-time
    randomness draws from a separate child stream.  If the budget dies during
    selection the run ends after the initial generation, flagged as
    truncated.
    """
    if algo is AlgorithmId.N:
        result, _ = optimize(target, config, seed)
        return result, SelectionOutcome(None, None, 0)
    if len(records) == 0:
        raise ValueError(f"algorithm {algo.value} needs a nonempty knowledge base")

    selection_rng = rng_for(seed, "selection")
    state: dict = {"extra": 0}

    def hook(population, fitness, eval_fn):
        def counting_eval(z):
            values = eval_fn(z)
            state["extra"] += z.shape[0]
            return values

        scores = compute_scores(
            algo, records, population, fitness, counting_eval, selection_rng, oc_samples
        )
        chosen = int(np.argmax(scores))  # lowest index wins ties
        state["scores"] = scores
        elite = records[chosen].best_solution
        injected_value = float(eval_fn(elite.reshape(1, -1))[0])
        state["chosen"] = chosen
        worst = int(np.argmax(fitness))
        population = population.copy()
        fitness = fitness.copy()
        population[worst] = elite
        fitness[worst] = injected_value
        return population, fitness

    result, _ = optimize(target, config, seed, hook=hook)
    outcome = SelectionOutcome(
        chosen_source=state.get("chosen"),
        scores=state.get("scores"),
        extra_evals=state["extra"],
    )
    return result, outcome
