"""Backbone evolutionary algorithm: SBX, polynomial mutation, 1/2 truncation.

The optimizer works entirely in the normalized space [0, 1]^d.  Each
generation pairs the parents at random, produces one offspring per parent via
simulated binary crossover followed by polynomial mutation, and keeps the
best half of the merged parent/offspring pool.  An optional hook may rewrite
the evaluated initial population before the loop starts; transfer algorithms
use it to inject source solutions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .families import (
    BudgetExhaustedError,
    EvalBudget,
    TaskInstance,
    evaluate_batch,
    evaluate_noise_free,
)


@dataclass(frozen=True)
class EAConfig:
    """Operator parameters and evaluation budget of the backbone EA."""

    pop_size: int = 50
    p_c: float = 1.0
    eta_c: float = 15.0
    p_m: float | None = None  # None means 1/d
    eta_m: float = 15.0
    budget: int = 5000

    def __post_init__(self) -> None:
        if self.pop_size < 2 or self.pop_size % 2 != 0:
            raise ValueError(f"pop_size must be an even integer >= 2, got {self.pop_size}")
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError(f"p_c must be in [0, 1], got {self.p_c}")
        if self.p_m is not None and not 0.0 <= self.p_m <= 1.0:
            raise ValueError(f"p_m must be in [0, 1], got {self.p_m}")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ValueError("distribution indices must be positive")
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")

    def mutation_rate(self, dim: int) -> float:
        return 1.0 / dim if self.p_m is None else self.p_m


class GenerationSnapshot(NamedTuple):
    """Population state (normalized) and fitness after one generation."""

    population: np.ndarray
    fitness: np.ndarray


@dataclass
class RunResult:
    """Outcome of one optimizer run.

    ``history`` is the best-so-far objective per generation as seen by the
    optimizer (noisy for the quartic family); ``history_noise_free`` reports
    the deterministic objective of the same incumbent solutions.
    """

    history: np.ndarray
    history_noise_free: np.ndarray
    history_evals: np.ndarray
    final_best_value: float
    final_best_solution: np.ndarray
    final_best_noise_free: float
    evals_used: int
    seed: int
    truncated: bool = False

    def history_to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["generation", "evals_used", "best_so_far", "best_so_far_noise_free"])
            for gen in range(len(self.history)):
                writer.writerow(
                    [
                        gen,
                        int(self.history_evals[gen]),
                        repr(float(self.history[gen])),
                        repr(float(self.history_noise_free[gen])),
                    ]
                )


# Hook contract: hook(population, fitness, eval_fn) -> (population, fitness).
# eval_fn evaluates a (n, d) batch on the target task and charges the run
# budget; it may raise BudgetExhaustedError, which truncates the run.
InjectionHook = Callable[
    [np.ndarray, np.ndarray, Callable[[np.ndarray], np.ndarray]],
    tuple[np.ndarray, np.ndarray],
]


def _sbx_pairs(
    pa: np.ndarray,
    pb: np.ndarray,
    eta_c: float,
    p_c: float,
    rng: np.random.Generator,
    clip: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized SBX over row-aligned parent matrices.

    Follows the canonical real-coded form: a crossing pair recombines each
    variable with probability 1/2 and swaps the two children per variable
    with probability 1/2; both gates preserve the per-coordinate pair mean.
    """
    n_pairs, _ = pa.shape
    crossed = rng.random(n_pairs) < p_c
    u = rng.random(pa.shape)
    exponent = 1.0 / (eta_c + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** exponent, (1.0 / (2.0 * (1.0 - u))) ** exponent)
    ca = 0.5 * ((1.0 + beta) * pa + (1.0 - beta) * pb)
    cb = 0.5 * ((1.0 - beta) * pa + (1.0 + beta) * pb)
    swap = rng.random(pa.shape) < 0.5
    ca, cb = np.where(swap, cb, ca), np.where(swap, ca, cb)
    # coincident parent values are copied through, bit-exactly
    recombine = (rng.random(pa.shape) < 0.5) & crossed[:, None] & (np.abs(pa - pb) > 1e-14)
    ca = np.where(recombine, ca, pa)
    cb = np.where(recombine, cb, pb)
    if clip:
        np.clip(ca, 0.0, 1.0, out=ca)
        np.clip(cb, 0.0, 1.0, out=cb)
    return ca, cb


def sbx_crossover(
    parent_a: np.ndarray,
    parent_b: np.ndarray,
    eta_c: float = 15.0,
    p_c: float = 1.0,
    rng: np.random.Generator | None = None,
    clip: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover of one parent pair in [0, 1]^d.

    With probability 1 - p_c the parents are copied through unchanged.  The
    unclipped children preserve the parents' per-coordinate mean exactly.
    """
    if rng is None:
        raise ValueError("sbx_crossover requires a random generator")
    pa = np.asarray(parent_a, dtype=float).reshape(1, -1)
    pb = np.asarray(parent_b, dtype=float).reshape(1, -1)
    ca, cb = _sbx_pairs(pa, pb, eta_c, p_c, rng, clip=clip)
    return ca[0], cb[0]


def polynomial_mutation(
    x: np.ndarray,
    eta_m: float = 15.0,
    p_m: float = 0.1,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Bounded polynomial mutation against [0, 1] bounds, per-variable rate p_m."""
    if rng is None:
        raise ValueError("polynomial_mutation requires a random generator")
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    out = np.atleast_2d(arr).copy()
    selected = rng.random(out.shape) < p_m
    u = rng.random(out.shape)
    power = eta_m + 1.0
    low = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - out) ** power
    high = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * out**power
    delta = np.where(u < 0.5, low ** (1.0 / power) - 1.0, 1.0 - high ** (1.0 / power))
    out = np.where(selected, out + delta, out)
    np.clip(out, 0.0, 1.0, out=out)
    return out[0] if single else out


@dataclass
class _BestTracker:
    task: TaskInstance
    value: float = np.inf
    solution: np.ndarray = field(default_factory=lambda: np.empty(0))
    noise_free: float = np.inf

    def update(self, population: np.ndarray, fitness: np.ndarray) -> None:
        i = int(np.argmin(fitness))
        if fitness[i] < self.value:
            self.value = float(fitness[i])
            self.solution = population[i].copy()
            self.noise_free = evaluate_noise_free(self.task, self.solution)


def optimize(
    task: TaskInstance,
    config: EAConfig,
    seed: int,
    hook: InjectionHook | None = None,
) -> tuple[RunResult, list[GenerationSnapshot]]:
    """Run the backbone EA on a task; returns the result and the generation history.

    The run stops as soon as a further full generation would exceed the
    budget.  A hook raising BudgetExhaustedError truncates the run after the
    initial generation, which is flagged on the result.
    """
    n = config.pop_size
    if config.budget < n:
        raise ValueError(f"budget {config.budget} cannot evaluate one population of {n}")
    rng = np.random.default_rng(seed)
    budget = EvalBudget(config.budget)
    p_m = config.mutation_rate(task.dim)

    def eval_fn(z: np.ndarray) -> np.ndarray:
        return evaluate_batch(task, z, budget, rng)

    population = rng.random((n, task.dim))
    fitness = eval_fn(population)
    truncated = False
    if hook is not None:
        try:
            population, fitness = hook(population, fitness, eval_fn)
        except BudgetExhaustedError:
            truncated = True

    tracker = _BestTracker(task)
    tracker.update(population, fitness)
    snapshots = [GenerationSnapshot(population.copy(), fitness.copy())]
    history = [tracker.value]
    history_nf = [tracker.noise_free]
    history_evals = [budget.used]

    while not truncated and budget.remaining >= n:
        perm = rng.permutation(n)
        ca, cb = _sbx_pairs(
            population[perm[0::2]], population[perm[1::2]], config.eta_c, config.p_c, rng
        )
        children = np.empty_like(population)
        children[0::2] = ca
        children[1::2] = cb
        children = polynomial_mutation(children, config.eta_m, p_m, rng)
        child_fitness = eval_fn(children)
        pool = np.vstack([population, children])
        pool_fitness = np.concatenate([fitness, child_fitness])
        keep = np.argsort(pool_fitness, kind="stable")[:n]
        population, fitness = pool[keep], pool_fitness[keep]
        tracker.update(population, fitness)
        snapshots.append(GenerationSnapshot(population.copy(), fitness.copy()))
        history.append(tracker.value)
        history_nf.append(tracker.noise_free)
        history_evals.append(budget.used)

    result = RunResult(
        history=np.array(history),
        history_noise_free=np.array(history_nf),
        history_evals=np.array(history_evals, dtype=int),
        final_best_value=tracker.value,
        final_best_solution=tracker.solution,
        final_best_noise_free=tracker.noise_free,
        evals_used=budget.used,
        seed=seed,
        truncated=truncated,
    )
    return result, snapshots
