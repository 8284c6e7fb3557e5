import numpy as np
import pytest

from oracles import wilcoxon_enumeration_p
from stopgen.stats import RankingReport, ranking_groups, spearman, wilcoxon_rank_sum


class TestWilcoxonExact:
    def test_fully_separated_three_vs_three(self):
        result = wilcoxon_rank_sum([1, 2, 3], [4, 5, 6])
        assert result.method == "exact"
        assert result.p_value == pytest.approx(0.1)

    def test_fully_separated_two_vs_two(self):
        result = wilcoxon_rank_sum([1, 2], [3, 4])
        assert result.method == "exact"
        assert result.p_value == pytest.approx(2 / 6)

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(1, 6))
            pooled = rng.permutation(rng.random(n1 + n2) * 10)
            a, b = pooled[:n1], pooled[n1:]
            result = wilcoxon_rank_sum(a, b)
            assert result.method == "exact"
            assert result.p_value == float(wilcoxon_enumeration_p(a, b))

    def test_statistic_is_mann_whitney_u(self):
        result = wilcoxon_rank_sum([1, 2, 3], [4, 5, 6])
        assert result.statistic == 0.0
        flipped = wilcoxon_rank_sum([4, 5, 6], [1, 2, 3])
        assert flipped.statistic == 9.0  # n1 * n2

    def test_p_capped_at_one(self):
        result = wilcoxon_rank_sum([1, 3], [2, 4])
        assert result.p_value <= 1.0


class TestWilcoxonApprox:
    def test_identical_samples_give_p_one(self):
        a = [1.0, 2.0, 3.0]
        result = wilcoxon_rank_sum(a, a)
        assert result.method == "normal_approx"  # ties force the approximation
        assert result.p_value == 1.0

    def test_large_samples_use_approximation(self):
        rng = np.random.default_rng(1)
        result = wilcoxon_rank_sum(rng.random(30), rng.random(30))
        assert result.method == "normal_approx"

    def test_ties_fall_back_to_approximation(self):
        result = wilcoxon_rank_sum([1, 2, 2], [3, 4, 5])
        assert result.method == "normal_approx"

    def test_separated_large_samples_significant(self):
        rng = np.random.default_rng(2)
        a = rng.random(30)
        b = rng.random(30) + 10.0
        result = wilcoxon_rank_sum(a, b)
        assert result.p_value < 1e-6
        assert result.significant

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        a, b = rng.random(15), rng.random(12)
        base = wilcoxon_rank_sum(a, b)
        warped = wilcoxon_rank_sum(np.exp(5 * a), np.exp(5 * b))
        assert warped.p_value == pytest.approx(base.p_value)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            wilcoxon_rank_sum([], [1.0])


class TestRankingGroups:
    def test_identical_samples_form_one_group(self):
        sample = list(np.random.default_rng(0).random(20))
        report = ranking_groups({"a": sample, "b": sample})
        assert len(report.groups) == 1
        assert report.group_ids == (0, 0)

    def test_separated_medians_form_three_groups(self):
        rng = np.random.default_rng(1)
        samples = {
            "mid": list(100.0 + 0.1 * rng.random(20)),
            "low": list(0.1 * rng.random(20)),
            "high": list(200.0 + 0.1 * rng.random(20)),
        }
        report = ranking_groups(samples)
        assert report.order == ("low", "mid", "high")
        assert len(report.groups) == 3
        assert all(p < 0.05 for p in report.adjacent_p[1:])

    def test_group_count_never_exceeds_algorithms(self):
        rng = np.random.default_rng(2)
        samples = {name: list(rng.random(10)) for name in "abcde"}
        report = ranking_groups(samples)
        assert len(report.groups) <= 5

    def test_positive_rescaling_invariance(self):
        rng = np.random.default_rng(3)
        samples = {name: list(rng.random(15) + i) for i, name in enumerate("abc")}
        base = ranking_groups(samples)
        scaled = ranking_groups({k: [40.0 * v for v in vals] for k, vals in samples.items()})
        assert base.order == scaled.order
        assert base.group_ids == scaled.group_ids

    def test_single_algorithm_rejected(self):
        with pytest.raises(ValueError):
            ranking_groups({"only": [1.0, 2.0]})

    def test_csv_schema(self, tmp_path):
        rng = np.random.default_rng(4)
        report = ranking_groups({"a": list(rng.random(10)), "b": list(rng.random(10) + 5)})
        path = tmp_path / "ranking.csv"
        report.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "rank,algorithm,median,group_id"
        assert len(lines) == 3
        assert lines[1].startswith("1,a,")

    def test_groups_property_partitions_order(self):
        rng = np.random.default_rng(5)
        samples = {name: list(rng.random(12) + 3 * i) for i, name in enumerate("abcd")}
        report = ranking_groups(samples)
        flattened = [name for group in report.groups for name in group]
        assert tuple(flattened) == report.order


class TestSpearman:
    def test_perfect_agreement(self):
        a = np.random.default_rng(0).random(10)
        assert spearman(a, a) == 1.0

    def test_perfect_reversal(self):
        a = np.array([1.0, 2.0, 5.0, 9.0])
        assert spearman(a, -a) == -1.0

    def test_hand_example(self):
        assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_constant_input_is_zero(self):
        assert spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) == 0.0

    def test_tied_values_use_average_ranks(self):
        # ranks of a: (1.5, 1.5, 3); ranks of b: (1, 2, 3)
        value = spearman([2.0, 2.0, 5.0], [1.0, 2.0, 3.0])
        assert value == pytest.approx(0.866025, abs=1e-5)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            spearman([1.0, 2.0], [1.0, 2.0, 3.0])
