"""Construction of sequential transfer optimization problems.

A problem bundles one target task with k source tasks whose optima realize
similarity values drawn from a configurable distribution.  Solving every
source task with the backbone optimizer and recording the search traces
yields the knowledge base that transfer algorithms consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .ea import EAConfig, GenerationSnapshot, optimize
from .families import FamilyId, TaskInstance
from .seeds import derive_seed, rng_for
from .similarity import SimilarityKind, SimilaritySpec, sample_similarities, similarity

ALL_FAMILIES: tuple[FamilyId, ...] = tuple(FamilyId)

DEFAULT_SOURCE_BUDGET = 5000


class TransferScenario(Enum):
    INTRA_FAMILY = "Ta"
    INTER_FAMILY = "Te"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "TransferScenario":
        key = name.strip().lower()
        if key in ("ta", "intra", "intra-family", "intra_family"):
            return cls.INTRA_FAMILY
        if key in ("te", "inter", "inter-family", "inter_family"):
            return cls.INTER_FAMILY
        raise ValueError(f"unknown transfer scenario {name!r}")


class DegenerateDirectionError(ValueError):
    """The random direction anchor coincides with the target optimum."""


class StrictModeError(RuntimeError):
    """Strict generation could not find a clamp-free source optimum."""


def source_optimum(o_t: np.ndarray, r: np.ndarray, s: float) -> np.ndarray:
    """Place a source optimum at Chebyshev distance 1 - s from o_t along r - o_t.

    The returned point may leave [0, 1]^d; the caller decides between
    clamping and resampling.  The direction is normalized so its largest
    coordinate is exactly +-1, which keeps the realized similarity equal to s
    up to one rounding.
    """
    o_t = np.asarray(o_t, dtype=float)
    r = np.asarray(r, dtype=float)
    diff = r - o_t
    norm = np.max(np.abs(diff))
    if norm == 0.0:
        raise DegenerateDirectionError("direction anchor equals the target optimum")
    return o_t + (1.0 - s) * (diff / norm)


@dataclass(frozen=True)
class StopProblem:
    """A generated transfer optimization problem."""

    name: str
    target: TaskInstance
    sources: tuple[TaskInstance, ...]
    scenario: TransferScenario
    similarity_spec: SimilaritySpec
    assigned_similarities: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if len(self.sources) != len(self.assigned_similarities):
            raise ValueError("one similarity value is required per source")
        dims = {t.dim for t in (self.target, *self.sources)}
        if len(dims) != 1:
            raise ValueError("target and sources must share one dimension")
        for src in self.sources:
            same = src.family is self.target.family
            if self.scenario is TransferScenario.INTRA_FAMILY and not same:
                raise ValueError("intra-family problem contains an out-of-family source")
            if self.scenario is TransferScenario.INTER_FAMILY and same:
                raise ValueError("inter-family problem contains a target-family source")
        sims = np.asarray(self.assigned_similarities, dtype=float).copy()
        sims.setflags(write=False)
        object.__setattr__(self, "assigned_similarities", sims)
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def k(self) -> int:
        return len(self.sources)

    @property
    def dim(self) -> int:
        return self.target.dim

    def realized_similarities(self) -> np.ndarray:
        """Chebyshev similarity of each source optimum to the target optimum."""
        return np.array(
            [similarity(s.optimum_norm, self.target.optimum_norm) for s in self.sources]
        )


def problem_name(
    family: FamilyId, scenario: TransferScenario, spec: SimilaritySpec, d: int, k: int
) -> str:
    return f"{family.label}-{scenario.token}-{spec.token}-{d}-{k}"


def generate_problem(
    candidates,
    target_family_index: int,
    scenario: TransferScenario,
    spec: SimilaritySpec,
    d: int,
    k: int,
    seed: int,
    strict: bool = False,
    max_retries: int = 100,
) -> StopProblem:
    """Generate a problem with k source tasks realizing the requested similarities.

    Child random streams are derived per role ("similarities", "target") and
    per source index, so increasing k leaves the earlier draws untouched.  In
    the default mode, source-optimum coordinates that leave [0, 1] are set to
    the nearest bound, which can raise the realized similarity above the
    assigned value; ``strict`` resamples the direction anchor (up to
    ``max_retries`` times) until no clamping is needed, making the realized
    similarity exact.
    """
    candidates = tuple(candidates)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    if not 0 <= target_family_index < len(candidates):
        raise ValueError(f"target family index {target_family_index} out of range")
    target_family = candidates[target_family_index]
    others = tuple(f for f in candidates if f is not target_family)
    if scenario is TransferScenario.INTER_FAMILY and not others:
        raise ValueError("inter-family transfer needs at least two candidate families")

    sims = sample_similarities(spec, k, rng_for(seed, "similarities"))

    o_t = rng_for(seed, "target").random(d)
    o_t[int(np.argmin(o_t))] = 0.0  # first index on ties
    target = TaskInstance(target_family, d, o_t)

    sources = []
    for i in range(k):
        src_rng = rng_for(seed, "source", i)
        if scenario is TransferScenario.INTRA_FAMILY:
            family = target_family
        else:
            family = others[int(src_rng.integers(len(others)))]
        o_si = _draw_source_optimum(o_t, float(sims[i]), src_rng, strict, max_retries)
        sources.append(TaskInstance(family, d, o_si))

    name = problem_name(target_family, scenario, spec, d, k)
    return StopProblem(
        name=name,
        target=target,
        sources=tuple(sources),
        scenario=scenario,
        similarity_spec=spec,
        assigned_similarities=sims,
        seed=seed,
    )


def _draw_source_optimum(
    o_t: np.ndarray, s: float, rng: np.random.Generator, strict: bool, max_retries: int
) -> np.ndarray:
    attempts = max_retries if strict else 1
    candidate = None
    for _ in range(attempts):
        while True:
            r = rng.random(o_t.shape[0])
            try:
                candidate = source_optimum(o_t, r, s)
            except DegenerateDirectionError:
                continue  # probability-zero event, fresh anchor
            break
        if np.all(candidate >= 0.0) and np.all(candidate <= 1.0):
            return candidate
    if strict:
        raise StrictModeError(
            f"no clamp-free source optimum found in {max_retries} attempts (s={s})"
        )
    return np.clip(candidate, 0.0, 1.0)


# Table of benchmark problems: target family, scenario, distribution, dimension.
BENCHMARK_TABLE: tuple[tuple[FamilyId, TransferScenario, SimilarityKind, int], ...] = (
    (FamilyId.SPHERE, TransferScenario.INTRA_FAMILY, SimilarityKind.H1H, 50),
    (FamilyId.ELLIPSOID, TransferScenario.INTER_FAMILY, SimilarityKind.H2H, 25),
    (FamilyId.SCHWEFEL22, TransferScenario.INTRA_FAMILY, SimilarityKind.H2H, 30),
    (FamilyId.QUARTIC_NOISE, TransferScenario.INTER_FAMILY, SimilarityKind.H1H, 50),
    (FamilyId.ACKLEY, TransferScenario.INTRA_FAMILY, SimilarityKind.M1, 25),
    (FamilyId.RASTRIGIN, TransferScenario.INTER_FAMILY, SimilarityKind.M2, 50),
    (FamilyId.GRIEWANK, TransferScenario.INTRA_FAMILY, SimilarityKind.M3, 25),
    (FamilyId.LEVY, TransferScenario.INTER_FAMILY, SimilarityKind.M4, 30),
    (FamilyId.SPHERE, TransferScenario.INTRA_FAMILY, SimilarityKind.L1, 25),
    (FamilyId.RASTRIGIN, TransferScenario.INTER_FAMILY, SimilarityKind.L2, 30),
    (FamilyId.ACKLEY, TransferScenario.INTRA_FAMILY, SimilarityKind.L2, 50),
    (FamilyId.ELLIPSOID, TransferScenario.INTER_FAMILY, SimilarityKind.L1, 50),
)


def make_benchmark(problem_id: int, k: int, seed: int, strict: bool = False) -> StopProblem:
    """Instantiate benchmark problem 1..12 with a user-chosen source count."""
    if not 1 <= problem_id <= len(BENCHMARK_TABLE):
        raise ValueError(f"benchmark id must be in 1..{len(BENCHMARK_TABLE)}, got {problem_id}")
    family, scenario, kind, d = BENCHMARK_TABLE[problem_id - 1]
    return generate_problem(
        ALL_FAMILIES,
        ALL_FAMILIES.index(family),
        scenario,
        SimilaritySpec(kind),
        d,
        k,
        seed,
        strict=strict,
    )


@dataclass
class SearchRecord:
    """Per-source optimization trace stored in the knowledge base."""

    family: FamilyId
    generations: list[GenerationSnapshot]
    best_solution: np.ndarray
    best_fitness: float

    @property
    def final_population(self) -> np.ndarray:
        return self.generations[-1].population

    @property
    def final_fitness(self) -> np.ndarray:
        return self.generations[-1].fitness


@dataclass
class KnowledgeBase:
    """A generated problem together with the solved traces of its sources.

    Transfer algorithms read only ``records``; the problem's optima act as an
    analysis-only oracle and are kept out of the record data.
    """

    problem: StopProblem
    records: list[SearchRecord]
    source_budget: int
    kb_seed: int

    @property
    def k(self) -> int:
        return len(self.records)


def build_knowledge_base(
    problem: StopProblem,
    seed: int,
    config: EAConfig | None = None,
    source_budget: int | None = None,
    thin: int = 1,
) -> KnowledgeBase:
    """Optimize every source task and record the generation-wise traces.

    Each source runs with its own child seed derived from ``seed``, so the
    traces are independent of source ordering.  ``thin`` keeps every thin-th
    generation snapshot (the final generation is always kept).
    """
    if problem.k < 1:
        raise ValueError("cannot build a knowledge base without sources")
    if thin < 1:
        raise ValueError(f"thin must be at least 1, got {thin}")
    budget = DEFAULT_SOURCE_BUDGET if source_budget is None else source_budget
    base = config or EAConfig()
    run_config = EAConfig(
        pop_size=base.pop_size,
        p_c=base.p_c,
        eta_c=base.eta_c,
        p_m=base.p_m,
        eta_m=base.eta_m,
        budget=budget,
    )
    if budget < run_config.pop_size:
        raise ValueError(f"source budget {budget} cannot evaluate one population")

    records = []
    for i, src in enumerate(problem.sources):
        result, snapshots = optimize(src, run_config, derive_seed(seed, "source-opt", i))
        kept = snapshots[::thin]
        if kept[-1] is not snapshots[-1]:
            kept.append(snapshots[-1])
        records.append(
            SearchRecord(
                family=src.family,
                generations=kept,
                best_solution=result.final_best_solution,
                best_fitness=result.final_best_value,
            )
        )
    return KnowledgeBase(problem=problem, records=records, source_budget=budget, kb_seed=seed)


KB_FORMAT_VERSION = 1


def _spec_to_json(spec: SimilaritySpec) -> dict:
    doc = {"kind": spec.token}
    if spec.kind is SimilarityKind.CUSTOM:
        doc["knots"] = [[s, d] for s, d in spec.custom_knots]
    return doc


def _spec_from_json(doc: dict) -> SimilaritySpec:
    kind = doc["kind"]
    if kind == "custom":
        return SimilaritySpec.custom(doc["knots"])
    return SimilaritySpec.named(kind)


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Persist a knowledge base as a single JSON document."""
    problem = kb.problem
    doc = {
        "version": KB_FORMAT_VERSION,
        "problem": {
            "name": problem.name,
            "families": {
                "target": problem.target.family.label,
                "sources": [s.family.label for s in problem.sources],
            },
            "d": problem.dim,
            "k": problem.k,
            "scenario": problem.scenario.token,
            "similarity": _spec_to_json(problem.similarity_spec),
            "seed": problem.seed,
            "assigned_similarities": problem.assigned_similarities.tolist(),
            "source_budget": kb.source_budget,
            "kb_seed": kb.kb_seed,
        },
        "oracle": {
            "target_optimum": problem.target.optimum_norm.tolist(),
            "source_optima": [s.optimum_norm.tolist() for s in problem.sources],
        },
        "sources": [
            {
                "family": record.family.label,
                "best_solution": record.best_solution.tolist(),
                "best_fitness": record.best_fitness,
                "generations": [
                    {"population": g.population.tolist(), "fitness": g.fitness.tolist()}
                    for g in record.generations
                ],
            }
            for record in kb.records
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_kb(path: str | Path) -> KnowledgeBase:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != KB_FORMAT_VERSION:
        raise ValueError(f"unsupported knowledge base version {doc.get('version')!r}")
    try:
        return _kb_from_json(doc)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed knowledge base document {path}: {exc}") from exc


def _kb_from_json(doc: dict) -> KnowledgeBase:
    meta = doc["problem"]
    oracle = doc["oracle"]
    scenario = TransferScenario.parse(meta["scenario"])
    spec = _spec_from_json(meta["similarity"])
    d = int(meta["d"])
    target = TaskInstance(
        FamilyId.from_label(meta["families"]["target"]), d, np.array(oracle["target_optimum"])
    )
    sources = tuple(
        TaskInstance(FamilyId.from_label(label), d, np.array(opt))
        for label, opt in zip(meta["families"]["sources"], oracle["source_optima"])
    )
    problem = StopProblem(
        name=meta["name"],
        target=target,
        sources=sources,
        scenario=scenario,
        similarity_spec=spec,
        assigned_similarities=np.array(meta["assigned_similarities"]),
        seed=int(meta["seed"]),
    )
    records = [
        SearchRecord(
            family=FamilyId.from_label(entry["family"]),
            generations=[
                GenerationSnapshot(np.array(g["population"]), np.array(g["fitness"]))
                for g in entry["generations"]
            ],
            best_solution=np.array(entry["best_solution"]),
            best_fitness=float(entry["best_fitness"]),
        )
        for entry in doc["sources"]
    ]
    return KnowledgeBase(
        problem=problem,
        records=records,
        source_budget=int(meta["source_budget"]),
        kb_seed=int(meta["kb_seed"]),
    )
