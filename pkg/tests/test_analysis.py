import math
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgeval.analysis import (
    AggregatedRating,
    DegenerateInput,
    EmptyGroup,
    EmptyRatings,
    HumanRating,
    NotEnoughDisagreements,
    aggregate_all_ratings,
    aggregate_human_ratings,
    correlate,
    group_summary,
    kendall_tau,
    min_max_normalize,
    pearson,
    sample_disagreement_pairs,
    spearman,
)
from qgeval.baselines import ScoreTable

scipy_stats = pytest.importorskip("scipy.stats")

# Integer-valued floats keep the brute-force comparisons exact in ties.
vectors = st.lists(st.integers(-5, 5).map(float), min_size=2, max_size=10)
paired = st.integers(2, 10).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-5, 5).map(float), min_size=n, max_size=n),
        st.lists(st.integers(-5, 5).map(float), min_size=n, max_size=n),
    )
).filter(lambda xy: min(xy[0]) != max(xy[0]) and min(xy[1]) != max(xy[1]))


def brute_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return cov / math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))


def brute_ranks(values):
    ranks = []
    for v in values:
        smaller = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        ranks.append(smaller + (equal + 1) / 2)
    return ranks


def brute_kendall_tau_b(x, y):
    n = len(x)
    concordant = discordant = 0
    for i, j in combinations(range(n), 2):
        s = (x[i] - x[j]) * (y[i] - y[j])
        if s > 0:
            concordant += 1
        elif s < 0:
            discordant += 1
    n0 = n * (n - 1) / 2

    def tie_term(values):
        from collections import Counter

        return sum(t * (t - 1) / 2 for t in Counter(values).values())

    denom = math.sqrt((n0 - tie_term(x)) * (n0 - tie_term(y)))
    return (concordant - discordant) / denom


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_reversed(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_hand_case(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            pearson([1.0], [2.0])
        with pytest.raises(DegenerateInput):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(DegenerateInput):
            pearson([1, 2], [1, 2, 3])

    @given(paired)
    def test_matches_brute_force_and_scipy(self, xy):
        x, y = xy
        value = pearson(x, y)
        assert value == pytest.approx(brute_pearson(x, y), abs=1e-12)
        assert value == pytest.approx(scipy_stats.pearsonr(x, y)[0], abs=1e-9)

    @given(paired, st.floats(0.1, 5), st.floats(-3, 3))
    def test_affine_invariance(self, xy, a, b):
        x, y = xy
        scaled = [a * v + b for v in x]
        assert pearson(scaled, y) == pytest.approx(pearson(x, y), abs=1e-9)
        negated = [-v for v in x]
        assert pearson(negated, y) == pytest.approx(-pearson(x, y), abs=1e-9)


class TestSpearman:
    def test_monotone(self):
        assert spearman([1, 2, 5], [10, 20, 21]) == pytest.approx(1.0)
        assert spearman([1, 2, 5], [9, 3, 1]) == pytest.approx(-1.0)

    def test_hand_case(self):
        assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    @given(paired)
    def test_matches_brute_force_and_scipy(self, xy):
        x, y = xy
        value = spearman(x, y)
        assert value == pytest.approx(brute_pearson(brute_ranks(x), brute_ranks(y)), abs=1e-12)
        assert value == pytest.approx(scipy_stats.spearmanr(x, y)[0], abs=1e-9)

    @given(paired)
    def test_invariant_under_increasing_transform(self, xy):
        x, y = xy
        transformed = [v**3 + 2 * v for v in x]  # strictly increasing
        assert spearman(transformed, y) == pytest.approx(spearman(x, y), abs=1e-9)


class TestKendallTau:
    def test_identical_orderings(self):
        assert kendall_tau([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_hand_case(self):
        assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(2 / 3, abs=1e-12)

    def test_reversed(self):
        assert kendall_tau([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            kendall_tau([1, 1, 1], [1, 2, 3])

    @given(paired)
    def test_matches_brute_force_and_scipy(self, xy):
        x, y = xy
        value = kendall_tau(x, y)
        assert value == pytest.approx(brute_kendall_tau_b(x, y), abs=1e-12)
        assert value == pytest.approx(scipy_stats.kendalltau(x, y, variant="b")[0], abs=1e-9)

    @given(paired)
    def test_invariant_under_increasing_transform(self, xy):
        x, y = xy
        transformed = [v**3 + 2 * v for v in y]
        assert kendall_tau(x, transformed) == pytest.approx(kendall_tau(x, y), abs=1e-12)


class TestMinMaxNormalize:
    def test_examples(self):
        assert min_max_normalize([0, 5, 10]) == [0.0, 0.5, 1.0]
        assert min_max_normalize([7, 7, 7]) == [0.5, 0.5, 0.5]
        assert min_max_normalize([-1, 0]) == [0.0, 1.0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            min_max_normalize([])

    @given(st.lists(st.integers(-100, 100).map(float), min_size=1, max_size=12))
    def test_bounds_and_extreme_positions(self, scores):
        normalized = min_max_normalize(scores)
        assert all(0.0 <= v <= 1.0 for v in normalized)
        if min(scores) != max(scores):
            assert normalized[scores.index(max(scores))] == 1.0
            assert normalized[scores.index(min(scores))] == 0.0
            assert normalized.index(max(normalized)) == scores.index(max(scores))
            assert normalized.index(min(normalized)) == scores.index(min(scores))


def rating(example_id, system, rater, n, a, c):
    return HumanRating(example_id=example_id, system=system, rater_id=rater,
                       naturalness=n, answerability=a, complexity=c)


class TestAggregateRatings:
    def test_three_raters(self):
        ratings = [
            rating("e1", "s", "r1", 2, 2, 2),
            rating("e1", "s", "r2", 1, 2, 2),
            rating("e1", "s", "r3", 2, 2, 1),
        ]
        agg = aggregate_human_ratings(ratings)
        assert agg.mean_naturalness == pytest.approx(5 / 3)
        assert agg.mean_answerability == pytest.approx(2.0)
        assert agg.mean_complexity == pytest.approx(5 / 3)
        assert agg.mean_total == pytest.approx(16 / 3)
        assert agg.n_raters == 3

    def test_single_rating_identity(self):
        agg = aggregate_human_ratings([rating("e1", "s", "r1", 2, 1, 0)])
        assert (agg.mean_naturalness, agg.mean_answerability, agg.mean_complexity) == (2, 1, 0)
        assert agg.mean_total == 3

    def test_empty(self):
        with pytest.raises(EmptyRatings):
            aggregate_human_ratings([])

    def test_mixed_candidates_rejected(self):
        with pytest.raises(ValueError):
            aggregate_human_ratings([rating("e1", "s", "r1", 1, 1, 1), rating("e2", "s", "r1", 1, 1, 1)])

    def test_component_range_enforced(self):
        with pytest.raises(ValueError):
            rating("e1", "s", "r1", 3, 0, 0)

    def test_aggregate_all_groups_by_candidate(self):
        ratings = [
            rating("e1", "s", "r1", 2, 2, 2),
            rating("e2", "s", "r1", 0, 0, 0),
            rating("e1", "s", "r2", 0, 2, 2),
        ]
        aggregated = aggregate_all_ratings(ratings)
        assert [(a.example_id, a.n_raters) for a in aggregated] == [("e1", 2), ("e2", 1)]

    def test_mean_total_invariant(self):
        agg = AggregatedRating("e", "s", 1.5, 0.5, 2.0, n_raters=2)
        assert agg.mean_total == agg.mean_naturalness + agg.mean_answerability + agg.mean_complexity


class TestGroupSummary:
    def make_table(self, scores_by_system):
        table = ScoreTable()
        for system, values in scores_by_system.items():
            for i, value in enumerate(values):
                table.set_cell(f"e{i}", system, "m", value)
        return table

    def test_two_groups(self):
        table = self.make_table({"g1": [1.0, 1.0], "g2": [0.0, 0.0]})
        summary = group_summary(table)
        assert summary.means["g1"]["m"] == 1.0
        assert summary.means["g2"]["m"] == 0.0
        assert summary.gaps[("g1", "g2")]["m"] == 1.0
        assert summary.sizes == {"g1": 2, "g2": 2}

    def test_single_group_no_gaps(self):
        summary = group_summary(self.make_table({"only": [0.25, 0.75]}))
        assert summary.means["only"]["m"] == 0.5
        assert summary.gaps == {}

    def test_group_mapping(self):
        table = self.make_table({"sysA": [1.0], "sysB": [0.0]})
        summary = group_summary(table, {"sysA": "good", "sysB": "bad"})
        assert set(summary.means) == {"good", "bad"}

    def test_declared_empty_group(self):
        table = self.make_table({"sysA": [1.0]})
        with pytest.raises(EmptyGroup):
            group_summary(table, {"sysA": "g1", "missing": "g2"})

    def test_permutation_invariance_within_groups(self):
        a = self.make_table({"g": [0.1, 0.7, 0.4]})
        b = self.make_table({"g": [0.7, 0.4, 0.1]})
        assert group_summary(a).means == group_summary(b).means


class TestDisagreementSampling:
    def make_table(self, a_scores, b_scores):
        table = ScoreTable()
        for i, (a, b) in enumerate(zip(a_scores, b_scores)):
            table.set_cell(f"e{i}", "s", "ma", a)
            table.set_cell(f"e{i}", "s", "mb", b)
        return table

    def test_single_qualifying_pair(self):
        table = self.make_table([1.0, 0.0], [0.0, 1.0])
        with pytest.warns(NotEnoughDisagreements):
            pairs = sample_disagreement_pairs(table, "ma", "mb", k=20)
        assert pairs == [(("e0", "s"), ("e1", "s"))]

    def test_identical_metrics_have_no_disagreements(self):
        table = self.make_table([0.1, 0.5, 0.9], [0.1, 0.5, 0.9])
        with pytest.warns(NotEnoughDisagreements):
            pairs = sample_disagreement_pairs(table, "ma", "mb", k=5)
        assert pairs == []

    def test_deterministic_under_seed(self):
        a = [0.0, 1.0, 0.2, 0.8, 0.4, 0.6]
        b = [1.0, 0.0, 0.8, 0.2, 0.6, 0.4]
        table = self.make_table(a, b)
        first = sample_disagreement_pairs(table, "ma", "mb", k=3, seed=7)
        second = sample_disagreement_pairs(table, "ma", "mb", k=3, seed=7)
        assert first == second
        assert len(first) == 3

    def test_pairs_actually_disagree(self):
        a = [0.0, 1.0, 0.2, 0.8]
        b = [1.0, 0.0, 0.8, 0.2]
        table = self.make_table(a, b)
        col_a, col_b = table.column("ma"), table.column("mb")
        for row1, row2 in sample_disagreement_pairs(table, "ma", "mb", k=4, seed=1):
            da = col_a[row1] - col_a[row2]
            db = col_b[row1] - col_b[row2]
            assert da * db < 0

    def test_ties_do_not_qualify(self):
        table = self.make_table([0.5, 0.5], [0.1, 0.9])
        with pytest.warns(NotEnoughDisagreements):
            assert sample_disagreement_pairs(table, "ma", "mb", k=1) == []


class TestCorrelateHelper:
    def test_report_fields(self):
        report = correlate([1, 2, 3, 4], [1, 3, 2, 4], "naco", "overall")
        assert report.metric == "naco"
        assert report.target == "overall"
        assert report.n == 4
        assert report.pearson_r == pytest.approx(0.8)
        assert report.spearman_rho == pytest.approx(0.8)
        assert report.kendall_tau == pytest.approx(2 / 3)
