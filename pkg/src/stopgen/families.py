"""Shifted single-objective task families with a normalized common space.

Eight classic minimization functions, each with a configurable optimum.  The
optimum is stored in the normalized common space [0, 1]^d; candidate
solutions are likewise expressed in [0, 1]^d and mapped affinely into the
family's native box only at evaluation time.  Every family attains objective
value 0 at its configured optimum (the quartic family only once its additive
noise is suppressed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class FamilyId(Enum):
    """The eight task families and their native box half-widths."""

    SPHERE = ("Sphere", 100.0)
    ELLIPSOID = ("Ellipsoid", 50.0)
    SCHWEFEL22 = ("Schwefel", 30.0)
    QUARTIC_NOISE = ("Quartic", 5.0)
    ACKLEY = ("Ackley", 32.0)
    RASTRIGIN = ("Rastrigin", 10.0)
    GRIEWANK = ("Griewank", 200.0)
    LEVY = ("Levy", 20.0)

    def __init__(self, label: str, half_width: float):
        self.label = label
        self.half_width = half_width

    @property
    def bounds(self) -> tuple[float, float]:
        return (-self.half_width, self.half_width)

    @property
    def is_noisy(self) -> bool:
        return self is FamilyId.QUARTIC_NOISE

    @classmethod
    def from_label(cls, label: str) -> "FamilyId":
        for member in cls:
            if member.label.lower() == label.lower() or member.name.lower() == label.lower():
                return member
        raise ValueError(f"unknown family {label!r}")


class BudgetExhaustedError(RuntimeError):
    """Raised when an evaluation would exceed the evaluation budget."""

    def __init__(self, used: int, limit: int, requested: int = 1):
        super().__init__(
            f"evaluation budget exhausted: {used}/{limit} used, {requested} more requested"
        )
        self.used = used
        self.limit = limit
        self.requested = requested


@dataclass
class EvalBudget:
    """Counter of objective evaluations; one unit per evaluated solution."""

    limit: int
    used: int = 0

    def __post_init__(self) -> None:
        if self.limit < 0 or self.used < 0 or self.used > self.limit:
            raise ValueError(f"invalid budget state used={self.used} limit={self.limit}")

    @property
    def remaining(self) -> int:
        return self.limit - self.used

    def charge(self, n: int = 1) -> None:
        if self.used + n > self.limit:
            raise BudgetExhaustedError(self.used, self.limit, n)
        self.used += n


@dataclass(frozen=True)
class TaskInstance:
    """One optimization task: a family, a dimension and a normalized optimum."""

    family: FamilyId
    dim: int
    optimum_norm: np.ndarray
    bounds: tuple[float, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        opt = np.asarray(self.optimum_norm, dtype=float).copy()
        if opt.shape != (self.dim,):
            raise ValueError(f"optimum_norm shape {opt.shape} does not match dim {self.dim}")
        if np.any(opt < 0.0) or np.any(opt > 1.0):
            raise ValueError("optimum_norm coordinates must lie in [0, 1]")
        opt.setflags(write=False)
        object.__setattr__(self, "optimum_norm", opt)
        if self.bounds is None:
            object.__setattr__(self, "bounds", self.family.bounds)
        elif tuple(self.bounds) != self.family.bounds:
            raise ValueError(
                f"bounds {self.bounds} do not match the {self.family.label} box {self.family.bounds}"
            )

    @property
    def optimum_native(self) -> np.ndarray:
        return to_native(self, self.optimum_norm)


def to_native(task: TaskInstance, z: np.ndarray) -> np.ndarray:
    """Map points from [0, 1]^d into the task's native box."""
    z = _check_unit(task, z)
    lb, ub = task.bounds
    return lb + z * (ub - lb)


def from_native(task: TaskInstance, x: np.ndarray) -> np.ndarray:
    """Map native-box points back into [0, 1]^d (inverse of ``to_native``)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != task.dim:
        raise ValueError(f"expected dimension {task.dim}, got {x.shape[-1]}")
    lb, ub = task.bounds
    return (x - lb) / (ub - lb)


def _check_unit(task: TaskInstance, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != task.dim:
        raise ValueError(f"expected dimension {task.dim}, got {z.shape[-1]}")
    if np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    return z


def _objective(family: FamilyId, z: np.ndarray) -> np.ndarray:
    """Noise-free family objective on native-shifted points z = x - o, shape (n, d)."""
    d = z.shape[1]
    if family is FamilyId.SPHERE:
        return np.sum(z * z, axis=1)
    if family is FamilyId.ELLIPSOID:
        weights = np.arange(d, 0, -1, dtype=float)
        return np.sum(weights * z * z, axis=1)
    if family is FamilyId.SCHWEFEL22:
        a = np.abs(z)
        return np.sum(a, axis=1) + np.prod(a, axis=1)
    if family is FamilyId.QUARTIC_NOISE:
        idx = np.arange(1, d + 1, dtype=float)
        return np.sum(idx * z**4, axis=1)
    if family is FamilyId.ACKLEY:
        rms = np.sqrt(np.mean(z * z, axis=1))
        mean_cos = np.mean(np.cos(2.0 * np.pi * z), axis=1)
        return -20.0 * np.exp(-0.2 * rms) - np.exp(mean_cos) + 20.0 + math.e
    if family is FamilyId.RASTRIGIN:
        return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z), axis=1) + 10.0 * d
    if family is FamilyId.GRIEWANK:
        idx = np.arange(1, d + 1, dtype=float)
        return (
            1.0
            + np.sum(z * z, axis=1) / 4000.0
            - np.prod(np.cos(z / np.sqrt(idx)), axis=1)
        )
    if family is FamilyId.LEVY:
        w = 1.0 + z / 4.0
        first = np.sin(np.pi * w[:, 0]) ** 2
        middle = np.sum(
            (w[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:, :-1] + 1.0) ** 2),
            axis=1,
        )
        last = (w[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[:, -1]) ** 2)
        return first + middle + last
    raise ValueError(f"unhandled family {family}")


def _shifted(task: TaskInstance, z: np.ndarray) -> np.ndarray:
    x = to_native(task, np.atleast_2d(z))
    return x - task.optimum_native


def evaluate_batch(
    task: TaskInstance,
    z: np.ndarray,
    budget: EvalBudget,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Evaluate a (n, d) batch of normalized solutions, charging n to the budget.

    Quartic draws one fresh U[0, 1) noise term per solution from ``rng``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    budget.charge(z.shape[0])
    values = _objective(task.family, _shifted(task, z))
    if task.family.is_noisy:
        if rng is None:
            raise ValueError("a random generator is required to evaluate a noisy family")
        values = values + rng.random(z.shape[0])
    return values


def evaluate(
    task: TaskInstance,
    z: np.ndarray,
    budget: EvalBudget,
    rng: np.random.Generator | None = None,
) -> float:
    """Evaluate one normalized solution, charging a single budget unit."""
    return float(evaluate_batch(task, np.asarray(z, dtype=float).reshape(1, -1), budget, rng)[0])


def evaluate_noise_free_batch(task: TaskInstance, z: np.ndarray) -> np.ndarray:
    """Deterministic objective of a (n, d) batch; never charged, analysis only."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return _objective(task.family, _shifted(task, z))


def evaluate_noise_free(task: TaskInstance, z: np.ndarray) -> float:
    """Deterministic objective of one solution; never charged, analysis only."""
    return float(evaluate_noise_free_batch(task, np.asarray(z, dtype=float).reshape(1, -1))[0])
