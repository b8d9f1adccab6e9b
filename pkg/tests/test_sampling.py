import numpy as np
import pytest

from vpbias.data_model import DimensionSchema, FeatureTable
from vpbias.errors import InvalidKError
from vpbias.sampling import greedy_subsample, random_baseline, sorting_subsample

from conftest import (
    brute_force_best_removal,
    brute_force_bias,
    brute_force_removal_scores,
    make_random_table,
)


class TestGreedySubsample:
    def test_tie_breaks_to_smallest_asn(self):
        # Two interchangeable members: either removal leaves bias unchanged,
        # so the smaller ASN goes first.
        table = FeatureTable(
            [DimensionSchema("d", "categorical", "Location")],
            {1: ["cat1"], 2: ["cat1"], 3: ["cat2"], 4: ["cat2"]},
        )
        result = greedy_subsample(table, {1, 2, 3, 4}, {1, 2}, 1)
        assert result.selected == {2}

    def test_removes_sole_overrepresented_member(self):
        # ASN 1 is the only member from a category holding 0.2% of the
        # population but 10% of the sample; its removal must win.
        rows = {1: ["Z"], 2: ["Z"]}
        for asn in range(3, 502):
            rows[asn] = ["X"]
        for asn in range(502, 1001):
            rows[asn] = ["Y"]
        table = FeatureTable([DimensionSchema("d", "categorical", "Location")], rows)
        vps = {1, 3, 4, 5, 6, 7, 502, 503, 504, 505}
        oracle_best, _ = brute_force_best_removal(table, set(rows), vps)
        assert oracle_best == 1
        result = greedy_subsample(table, set(rows), vps, 9)
        assert 1 not in result.selected

    def test_matches_bruteforce_at_every_step(self):
        rng = np.random.default_rng(314)
        for _ in range(8):
            table = make_random_table(rng, int(rng.integers(12, 25)))
            population = set(table.asns)
            vps = set(
                int(a) for a in rng.choice(sorted(population), size=10, replace=False)
            )
            k = int(rng.integers(1, 9))
            result = greedy_subsample(table, population, vps, k)
            current = set(vps)
            for size, bias in result.trajectory[1:]:
                best, best_bias = brute_force_best_removal(table, population, current)
                current.remove(best)
                assert len(current) == size
                assert bias == best_bias
            assert current == set(result.selected)

    def test_trajectory_self_consistent(self):
        rng = np.random.default_rng(1000)
        table = make_random_table(rng, 20)
        population = set(table.asns)
        vps = set(int(a) for a in rng.choice(sorted(population), size=8, replace=False))
        result = greedy_subsample(table, population, vps, 2)
        assert result.trajectory[0] == (8, brute_force_bias(table, population, vps))
        sizes = [s for s, _ in result.trajectory]
        assert sizes == list(range(8, 1, -1))

    def test_invalid_k(self):
        table = FeatureTable(
            [DimensionSchema("d", "categorical", "Location")], {1: ["a"], 2: ["b"]}
        )
        with pytest.raises(InvalidKError):
            greedy_subsample(table, {1, 2}, {1, 2}, 0)
        with pytest.raises(InvalidKError):
            greedy_subsample(table, {1, 2}, {1, 2}, 2)

    def test_early_exit_stops_at_local_optimum(self):
        # The sample equals the population: every removal increases bias,
        # so early exit keeps the full set.
        table = FeatureTable(
            [DimensionSchema("d", "categorical", "Location")],
            {1: ["a"], 2: ["a"], 3: ["b"], 4: ["b"]},
        )
        result = greedy_subsample(table, {1, 2, 3, 4}, {1, 2, 3, 4}, 1, early_exit=True)
        assert len(result.selected) == 4
        assert len(result.trajectory) == 1


class TestSortingSubsample:
    def test_scores_match_bruteforce(self):
        rng = np.random.default_rng(2718)
        for _ in range(8):
            table = make_random_table(rng, int(rng.integers(12, 25)))
            population = set(table.asns)
            vps = set(
                int(a) for a in rng.choice(sorted(population), size=9, replace=False)
            )
            result = sorting_subsample(table, population, vps, 3)
            oracle = brute_force_removal_scores(table, population, vps)
            assert set(result.removal_scores) == set(oracle)
            for asn, value in oracle.items():
                assert result.removal_scores[asn] == pytest.approx(value, abs=1e-12)

    def test_equals_greedy_for_single_removal(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            table = make_random_table(rng, 15)
            population = set(table.asns)
            vps = set(int(a) for a in rng.choice(sorted(population), size=7, replace=False))
            a = greedy_subsample(table, population, vps, 6)
            b = sorting_subsample(table, population, vps, 6)
            assert a.selected == b.selected
            assert a.trajectory == b.trajectory

    def test_first_removal_matches_greedy(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            table = make_random_table(rng, 18)
            population = set(table.asns)
            vps = set(int(a) for a in rng.choice(sorted(population), size=8, replace=False))
            g = greedy_subsample(table, population, vps, 4)
            s = sorting_subsample(table, population, vps, 4)
            # both start by removing the brute-force argmin
            best, best_bias = brute_force_best_removal(table, population, vps)
            assert best not in g.selected and best not in s.selected
            assert g.trajectory[1] == (len(vps) - 1, best_bias)
            assert s.trajectory[1] == (len(vps) - 1, best_bias)

    def test_size_invariants_on_interacting_instance(self):
        # Symmetric four-member instance with combined effects: only the
        # contract is asserted, not equality with greedy.
        table = FeatureTable(
            [DimensionSchema("d", "categorical", "Location")],
            {1: ["a"], 2: ["a"], 3: ["b"], 4: ["b"], 5: ["a"], 6: ["b"]},
        )
        result = sorting_subsample(table, set(range(1, 7)), {1, 2, 3, 4}, 2)
        assert len(result.selected) == 2
        sizes = [s for s, _ in result.trajectory]
        assert sizes == [4, 3, 2]


class TestRandomBaseline:
    def test_full_source_draw_is_degenerate(self, toy_table, toy_sample):
        population = set(range(1, 101))
        baseline = random_baseline(
            toy_table, population, toy_sample, k=len(toy_sample), iterations=10, seed=3
        )
        expected = brute_force_bias(toy_table, population, toy_sample)
        assert baseline.mean_bias == pytest.approx(expected)
        assert baseline.ci95_half_width == 0.0

    def test_population_sample_zero_bias(self, toy_table):
        population = set(range(1, 101))
        baseline = random_baseline(
            toy_table, population, population, k=100, iterations=5, seed=1
        )
        assert abs(baseline.mean_bias) < 1e-9

    def test_seeded_reproducible(self, toy_table):
        population = set(range(1, 101))
        a = random_baseline(toy_table, population, population, 20, iterations=20, seed=42)
        b = random_baseline(toy_table, population, population, 20, iterations=20, seed=42)
        assert a == b
        c = random_baseline(toy_table, population, population, 20, iterations=20, seed=43)
        assert c != a

    def test_bounds_ordering(self, toy_table):
        population = set(range(1, 101))
        b = random_baseline(toy_table, population, population, 10, iterations=30, seed=9)
        assert b.min_bias <= b.mean_bias <= b.max_bias

    def test_invalid_inputs(self, toy_table):
        population = set(range(1, 101))
        with pytest.raises(InvalidKError):
            random_baseline(toy_table, population, {1, 2}, 3)
        with pytest.raises(InvalidKError):
            random_baseline(toy_table, population, {1, 2}, 1, iterations=0)


class TestJsonShape:
    def test_subsample_json(self):
        table = FeatureTable(
            [DimensionSchema("d", "categorical", "Location")],
            {1: ["a"], 2: ["a"], 3: ["b"], 4: ["b"]},
        )
        result = greedy_subsample(table, {1, 2, 3, 4}, {1, 2, 3}, 2)
        obj = result.to_json_obj()
        assert obj["algorithm"] == "greedy"
        assert obj["k"] == 2
        assert obj["selected"] == sorted(result.selected)
        assert all(len(pair) == 2 for pair in obj["trajectory"])
