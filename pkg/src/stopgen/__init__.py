"""Problem generator and experiment harness for sequential transfer optimization."""

from .ea import EAConfig, RunResult, optimize, polynomial_mutation, sbx_crossover
from .families import (
    BudgetExhaustedError,
    EvalBudget,
    FamilyId,
    TaskInstance,
    evaluate,
    evaluate_batch,
    evaluate_noise_free,
    evaluate_noise_free_batch,
    from_native,
    to_native,
)
from .generator import (
    ALL_FAMILIES,
    KnowledgeBase,
    SearchRecord,
    StopProblem,
    TransferScenario,
    build_knowledge_base,
    generate_problem,
    load_kb,
    make_benchmark,
    save_kb,
)
from .seeds import derive_seed, rng_for
from .similarity import (
    HistogramEstimate,
    SimilarityKind,
    SimilaritySpec,
    analytic_bin_masses,
    cdf,
    estimate_density,
    sample_similarities,
    similarity,
)
from .stats import RankingReport, TestResult, ranking_groups, spearman, wilcoxon_rank_sum
from .toy import (
    CoverageResult,
    DecisionSpace,
    FeatureDistribution,
    IntervalTask,
    default_spaces,
    optimum_coverage,
    solve,
    toy_similarity_experiment,
)
from .transfer import AlgorithmId, SelectionOutcome, principal_directions, run_sto

__version__ = "0.1.0"

__all__ = [
    "ALL_FAMILIES",
    "AlgorithmId",
    "BudgetExhaustedError",
    "CoverageResult",
    "DecisionSpace",
    "EAConfig",
    "EvalBudget",
    "FamilyId",
    "FeatureDistribution",
    "HistogramEstimate",
    "IntervalTask",
    "KnowledgeBase",
    "RankingReport",
    "RunResult",
    "SearchRecord",
    "SelectionOutcome",
    "SimilarityKind",
    "SimilaritySpec",
    "StopProblem",
    "TaskInstance",
    "TestResult",
    "TransferScenario",
    "analytic_bin_masses",
    "build_knowledge_base",
    "cdf",
    "default_spaces",
    "derive_seed",
    "estimate_density",
    "evaluate",
    "evaluate_batch",
    "evaluate_noise_free",
    "evaluate_noise_free_batch",
    "from_native",
    "generate_problem",
    "load_kb",
    "make_benchmark",
    "optimize",
    "optimum_coverage",
    "polynomial_mutation",
    "principal_directions",
    "ranking_groups",
    "rng_for",
    "run_sto",
    "sample_similarities",
    "save_kb",
    "sbx_crossover",
    "similarity",
    "solve",
    "spearman",
    "to_native",
    "toy_similarity_experiment",
    "wilcoxon_rank_sum",
]
