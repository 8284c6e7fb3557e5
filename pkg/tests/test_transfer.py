import numpy as np
import pytest

from stopgen.ea import EAConfig, GenerationSnapshot, optimize
from stopgen.families import FamilyId, TaskInstance, evaluate_noise_free
from stopgen.generator import (
    ALL_FAMILIES,
    SearchRecord,
    TransferScenario,
    build_knowledge_base,
    generate_problem,
)
from stopgen.similarity import SimilarityKind, SimilaritySpec
from stopgen.transfer import (
    AlgorithmId,
    compute_scores,
    parse_algorithms,
    principal_directions,
    run_sto,
)

TRANSFER_ALGOS = [a for a in AlgorithmId if a not in (AlgorithmId.N,)]


def h1h_problem(d=5, k=2, seed=0):
    return generate_problem(
        ALL_FAMILIES,
        0,
        TransferScenario.INTRA_FAMILY,
        SimilaritySpec(SimilarityKind.H1H),
        d=d,
        k=k,
        seed=seed,
    )


def make_record(cloud, fitness, best_solution=None, family=FamilyId.SPHERE):
    cloud = np.asarray(cloud, dtype=float)
    fitness = np.asarray(fitness, dtype=float)
    best = cloud[int(np.argmin(fitness))] if best_solution is None else np.asarray(best_solution)
    return SearchRecord(
        family=family,
        generations=[GenerationSnapshot(cloud, fitness)],
        best_solution=best,
        best_fitness=float(np.min(fitness)),
    )


def _no_eval(z):
    raise AssertionError("this scoring method must not evaluate the target")


class TestParseAlgorithms:
    def test_parses_comma_list(self):
        assert parse_algorithms("N,E") == [AlgorithmId.N, AlgorithmId.E]

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError):
            parse_algorithms("N,XYZ")


class TestScores:
    def setup_method(self):
        rng = np.random.default_rng(0)
        self.rng = rng
        self.target_pop = rng.random((20, 4))
        self.target_fit = np.sum(self.target_pop**2, axis=1)
        self.incumbent = self.target_pop[np.argmin(self.target_fit)]

    def test_euclidean_score_monotone_in_distance(self):
        near = make_record(self.rng.random((12, 4)), np.arange(12.0), best_solution=self.incumbent + 0.01)
        far = make_record(self.rng.random((12, 4)), np.arange(12.0), best_solution=self.incumbent + 0.2)
        scores = compute_scores(
            AlgorithmId.E, [near, far], self.target_pop, self.target_fit, _no_eval, self.rng
        )
        assert scores[0] > scores[1]

    def test_hamming_score_counts_threshold_mismatches(self):
        incumbent_bits = self.incumbent >= 0.5
        agree = np.where(incumbent_bits, 0.9, 0.1)
        disagree = np.where(incumbent_bits, 0.1, 0.9)
        rec_a = make_record(self.rng.random((12, 4)), np.arange(12.0), best_solution=agree)
        rec_b = make_record(self.rng.random((12, 4)), np.arange(12.0), best_solution=disagree)
        scores = compute_scores(
            AlgorithmId.H, [rec_a, rec_b], self.target_pop, self.target_fit, _no_eval, self.rng
        )
        assert scores[0] == 0.0
        assert scores[1] == -4.0

    def test_kld_nonnegative_and_zero_for_identical_moments(self):
        same = make_record(self.target_pop.copy(), np.arange(20.0))
        shifted = make_record(self.target_pop + 0.3, np.arange(20.0))
        scores = compute_scores(
            AlgorithmId.KLD, [same, shifted], self.target_pop, self.target_fit, _no_eval, self.rng
        )
        assert scores[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(-scores >= -1e-12)
        assert scores[1] < scores[0]

    def test_wd_prefers_matching_cloud(self):
        same = make_record(self.target_pop.copy(), np.arange(20.0))
        shifted = make_record(self.target_pop + 0.3, np.arange(20.0))
        scores = compute_scores(
            AlgorithmId.WD, [same, shifted], self.target_pop, self.target_fit, _no_eval, self.rng
        )
        assert scores[0] == pytest.approx(0.0, abs=1e-12)
        assert scores[1] < scores[0]

    def test_oc_and_roc_are_plus_one_for_identical_rankings(self):
        cloud = self.rng.random((10, 4))
        stored = np.sum(cloud**2, axis=1)  # identical geometry as eval_fn below
        record = make_record(cloud, stored)

        def eval_fn(z):
            return np.sum(z**2, axis=1)

        for algo in (AlgorithmId.OC, AlgorithmId.ROC):
            scores = compute_scores(
                algo, [record], self.target_pop, self.target_fit, eval_fn, np.random.default_rng(3)
            )
            assert scores[0] == pytest.approx(1.0)

    def test_oc_roc_bounded_in_unit_interval(self):
        rng = np.random.default_rng(7)
        records = [make_record(rng.random((15, 4)), rng.random(15)) for _ in range(4)]

        def eval_fn(z):
            return rng.random(z.shape[0])

        for algo in (AlgorithmId.OC, AlgorithmId.ROC):
            scores = compute_scores(
                algo, records, self.target_pop, self.target_fit, eval_fn, rng
            )
            assert np.all(scores >= -1.0) and np.all(scores <= 1.0)

    def test_sa_score_bounded_and_maximal_for_same_cloud(self):
        same = make_record(self.target_pop.copy(), np.arange(20.0))
        rotated = make_record(self.rng.random((20, 4)), np.arange(20.0))
        scores = compute_scores(
            AlgorithmId.SA, [same, rotated], self.target_pop, self.target_fit, _no_eval, self.rng
        )
        assert scores[0] == pytest.approx(1.0, abs=1e-9)
        assert 0.0 <= scores[1] <= 1.0 + 1e-9

    def test_random_scores_are_uniform_per_rng(self):
        records = [make_record(self.rng.random((5, 4)), np.arange(5.0)) for _ in range(3)]
        a = compute_scores(
            AlgorithmId.R, records, self.target_pop, self.target_fit, _no_eval,
            np.random.default_rng(5),
        )
        b = compute_scores(
            AlgorithmId.R, records, self.target_pop, self.target_fit, _no_eval,
            np.random.default_rng(5),
        )
        assert np.array_equal(a, b)

    def test_argmax_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(9)
        scores = rng.random(6)
        assert np.argmax(scores) == np.argmax(123.4 * scores)


class TestPrincipalDirections:
    def test_line_cloud_first_direction(self):
        rng = np.random.default_rng(0)
        direction = np.array([3.0, 4.0]) / 5.0
        cloud = np.outer(rng.standard_normal(200), direction) + 0.01 * rng.standard_normal((200, 2))
        basis, deficient = principal_directions(cloud, 1)
        aligned = abs(float(basis[:, 0] @ direction))
        assert aligned > 1.0 - 1e-4
        assert not deficient

    def test_isotropic_eigenvalues_close(self):
        rng = np.random.default_rng(1)
        cloud = rng.standard_normal((10_000, 3))
        basis, _ = principal_directions(cloud, 3)
        cov = np.cov(cloud, rowvar=False, ddof=1)
        eigvals = np.sort(np.diag(basis.T @ cov @ basis))[::-1]
        assert eigvals[0] / eigvals[-1] < 1.1

    def test_covariance_round_trip(self):
        rng = np.random.default_rng(2)
        for d in (2, 3, 5):
            cloud = rng.standard_normal((400, d)) @ rng.random((d, d))
            basis, _ = principal_directions(cloud, d)
            cov = np.cov(cloud, rowvar=False, ddof=1)
            eigvals = np.diag(basis.T @ cov @ basis)
            rebuilt = basis @ np.diag(eigvals) @ basis.T
            assert np.linalg.norm(rebuilt - cov) < 1e-6

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(3)
        basis, _ = principal_directions(rng.random((50, 6)), 4)
        assert np.max(np.abs(basis.T @ basis - np.eye(4))) < 1e-8

    def test_rank_deficiency_flagged_with_completion(self):
        rng = np.random.default_rng(4)
        line = np.outer(rng.standard_normal(30), np.array([1.0, 0.0, 0.0]))
        basis, deficient = principal_directions(line, 3)
        assert deficient
        assert np.max(np.abs(basis.T @ basis - np.eye(3))) < 1e-8

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError):
            principal_directions(np.random.default_rng(0).random((3, 5)), 3)


class TestRunSto:
    def test_no_transfer_equals_plain_optimize(self):
        problem = h1h_problem()
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=300)
        plain, _ = optimize(problem.target, config, seed=7)
        via_sto, outcome = run_sto(AlgorithmId.N, problem.target, kb.records, config, seed=7)
        assert np.array_equal(plain.history, via_sto.history)
        assert plain.final_best_value == via_sto.final_best_value
        assert outcome.chosen_source is None
        assert outcome.extra_evals == 0

    def test_single_source_always_chosen(self):
        problem = h1h_problem(k=1)
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=400)
        for algo in TRANSFER_ALGOS:
            _, outcome = run_sto(algo, problem.target, kb.records, config, seed=3)
            assert outcome.chosen_source == 0, algo

    def test_empty_knowledge_base_rejected(self):
        problem = h1h_problem(k=1)
        with pytest.raises(ValueError):
            run_sto(AlgorithmId.E, problem.target, [], EAConfig(budget=100), seed=0)

    def test_budget_conservation_with_equal_generation_counts(self):
        problem = h1h_problem()
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=151)  # both N and E fit exactly two offspring generations
        res_n, _ = run_sto(AlgorithmId.N, problem.target, kb.records, config, seed=5)
        res_e, outcome = run_sto(AlgorithmId.E, problem.target, kb.records, config, seed=5)
        assert len(res_n.history) == len(res_e.history)
        assert res_n.evals_used == res_e.evals_used - outcome.extra_evals - 1

    def test_oc_probe_evaluations_are_charged(self):
        problem = h1h_problem(k=2)
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=151)
        res, outcome = run_sto(AlgorithmId.OC, problem.target, kb.records, config, seed=5)
        assert outcome.extra_evals == 20  # ten probes per source
        assert res.evals_used <= config.budget

    def test_injection_replaces_worst_individual(self):
        problem = h1h_problem()
        kb = build_knowledge_base(problem, seed=1, source_budget=500)
        config = EAConfig(budget=51)  # init + injection only
        res, outcome = run_sto(AlgorithmId.E, problem.target, kb.records, config, seed=9)
        injected = kb.records[outcome.chosen_source].best_solution
        # H1h: the injected elite sits on the shared optimum, so it leads the run
        assert res.history[0] == pytest.approx(
            evaluate_noise_free(problem.target, injected), abs=1e-12
        )

    def test_injected_elite_maps_through_identical_geometry(self):
        problem = h1h_problem(d=6, k=3, seed=2)
        kb = build_knowledge_base(problem, seed=4, source_budget=1000)
        config = EAConfig(budget=300)
        _, outcome = run_sto(AlgorithmId.E, problem.target, kb.records, config, seed=1)
        record = kb.records[outcome.chosen_source]
        target_value = evaluate_noise_free(problem.target, record.best_solution)
        assert target_value <= record.best_fitness + 1e-9

    def test_transfer_beats_baseline_on_shared_optimum(self):
        problem = h1h_problem(d=8, k=2, seed=3)
        kb = build_knowledge_base(problem, seed=2, source_budget=2000)
        config = EAConfig(budget=500)
        wins = 0
        for seed in range(5):
            res_n, _ = run_sto(AlgorithmId.N, problem.target, kb.records, config, seed=seed)
            res_e, _ = run_sto(AlgorithmId.E, problem.target, kb.records, config, seed=seed)
            wins += res_e.final_best_noise_free <= res_n.final_best_noise_free
        assert wins >= 4

    def test_budget_exhausted_during_selection_flags_truncation(self):
        problem = h1h_problem(k=1)
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=55)  # five spare evaluations, OC needs ten probes
        res, outcome = run_sto(AlgorithmId.OC, problem.target, kb.records, config, seed=0)
        assert res.truncated
        assert outcome.chosen_source is None
        assert len(res.history) == 1

    def test_deterministic_per_seed(self):
        problem = h1h_problem(k=3)
        kb = build_knowledge_base(problem, seed=1, source_budget=200)
        config = EAConfig(budget=200)
        a = run_sto(AlgorithmId.R, problem.target, kb.records, config, seed=21)
        b = run_sto(AlgorithmId.R, problem.target, kb.records, config, seed=21)
        assert a[1].chosen_source == b[1].chosen_source
        assert np.array_equal(a[0].history, b[0].history)

    def test_quartic_target_runs_with_noise(self):
        problem = generate_problem(
            ALL_FAMILIES,
            ALL_FAMILIES.index(FamilyId.QUARTIC_NOISE),
            TransferScenario.INTER_FAMILY,
            SimilaritySpec(SimilarityKind.H1H),
            d=4,
            k=2,
            seed=6,
        )
        kb = build_knowledge_base(problem, seed=3, source_budget=200)
        res, _ = run_sto(AlgorithmId.WD, problem.target, kb.records, EAConfig(budget=300), seed=2)
        assert res.evals_used <= 300
        assert np.all(np.diff(res.history) <= 0.0)
