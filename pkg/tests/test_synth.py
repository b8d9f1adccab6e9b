import json

import numpy as np
import pytest
from scipy import stats

from vpbias.errors import InvalidSpecError
from vpbias.metrics import bias_vector
from vpbias.sampling import random_baseline
from vpbias.synth import SynthSpec, category_tokens, generate


def spec_obj(n=200, seed=5, strategies=None):
    return {
        "n_ases": n,
        "seed": seed,
        "dimensions": [
            {"name": "region", "kind": "categorical", "category": "Location",
             "generator": "uniform-categorical", "k": 4},
            {"name": "kind", "kind": "categorical", "category": "NetworkType",
             "generator": "zipf-categorical", "k": 5, "s": 1.3},
            {"name": "cone", "kind": "numerical", "category": "NetworkSize",
             "generator": "lognormal", "mu": 1.0, "sigma": 1.5},
            {"name": "degree", "kind": "numerical", "category": "Topology",
             "generator": "pareto", "alpha": 1.2},
        ],
        "vp_strategies": strategies or [],
    }


class TestDeterminism:
    def test_same_seed_same_output(self):
        spec = SynthSpec.from_json_obj(
            spec_obj(strategies=[{"name": "r", "rule": "uniform-random", "k": 30}])
        )
        t1, s1 = generate(spec)
        t2, s2 = generate(spec)
        assert t1 == t2
        assert [v.members for v in s1] == [v.members for v in s2]

    def test_different_seed_differs(self):
        t1, _ = generate(SynthSpec.from_json_obj(spec_obj(seed=1)))
        t2, _ = generate(SynthSpec.from_json_obj(spec_obj(seed=2)))
        assert t1 != t2


class TestVpStrategies:
    def test_uniform_full_draw_is_population(self):
        spec = SynthSpec.from_json_obj(
            spec_obj(n=100, strategies=[{"name": "all", "rule": "uniform-random", "k": 100}])
        )
        table, sets = generate(spec)
        assert sets[0].members == frozenset(table.asns)
        report = bias_vector(table, set(table.asns), sets[0].members)
        assert abs(report.aggregate) < 1e-9

    def test_category_skew_is_more_biased_than_random(self):
        spec = SynthSpec.from_json_obj(
            spec_obj(
                n=1000,
                strategies=[
                    {"name": "skewed", "rule": "category-skew", "k": 50,
                     "dimension": "region", "category": "c01", "fraction": 0.9},
                ],
            )
        )
        table, sets = generate(spec)
        population = set(table.asns)
        skew_bias = bias_vector(table, population, sets[0].members).aggregate
        baseline = random_baseline(table, population, population, 50, iterations=30, seed=0)
        assert skew_bias > baseline.mean_bias

    def test_skew_fraction_counts(self):
        spec = SynthSpec.from_json_obj(
            spec_obj(
                n=1000,
                strategies=[
                    {"name": "s", "rule": "category-skew", "k": 40,
                     "dimension": "region", "category": "c00", "fraction": 0.75},
                ],
            )
        )
        table, sets = generate(spec)
        in_cat = sum(
            1 for a in sets[0].members if table.cell(a, "region") == "c00"
        )
        assert in_cat >= 30  # 0.75 * 40 drawn from the category, rest may add more


class TestMarginals:
    def test_uniform_categorical_goodness_of_fit(self):
        obj = {
            "n_ases": 100_000, "seed": 17,
            "dimensions": [
                {"name": "d", "kind": "categorical", "category": "Location",
                 "generator": "uniform-categorical", "k": 6},
            ],
        }
        table, _ = generate(SynthSpec.from_json_obj(obj))
        counts = np.zeros(6)
        for a in table.asns:
            counts[int(table.cell(a, "d")[1:])] += 1
        _, p = stats.chisquare(counts)
        assert p > 0.001

    def test_zipf_categorical_goodness_of_fit(self):
        k, s = 5, 1.4
        obj = {
            "n_ases": 100_000, "seed": 23,
            "dimensions": [
                {"name": "d", "kind": "categorical", "category": "Location",
                 "generator": "zipf-categorical", "k": k, "s": s},
            ],
        }
        table, _ = generate(SynthSpec.from_json_obj(obj))
        counts = np.zeros(k)
        for a in table.asns:
            counts[int(table.cell(a, "d")[1:])] += 1
        weights = 1.0 / np.arange(1, k + 1) ** s
        weights /= weights.sum()
        _, p = stats.chisquare(counts, f_exp=weights * counts.sum())
        assert p > 0.001


class TestValidation:
    def test_table_passes_data_model_validation(self):
        table, _ = generate(SynthSpec.from_json_obj(spec_obj()))
        assert len(table) == 200  # FeatureTable constructor validated it

    def test_rejects_bad_specs(self):
        with pytest.raises(InvalidSpecError):
            generate(SynthSpec.from_json_obj({"n_ases": 0, "seed": 1, "dimensions": []}))
        bad_gen = spec_obj()
        bad_gen["dimensions"][0]["generator"] = "mystery"
        with pytest.raises(InvalidSpecError):
            generate(SynthSpec.from_json_obj(bad_gen))
        bad_kind = spec_obj()
        bad_kind["dimensions"][0]["kind"] = "numerical"
        with pytest.raises(InvalidSpecError):
            generate(SynthSpec.from_json_obj(bad_kind))
        big_k = spec_obj(strategies=[{"name": "x", "rule": "uniform-random", "k": 10_000}])
        with pytest.raises(InvalidSpecError):
            generate(SynthSpec.from_json_obj(big_k))
        bad_dim = spec_obj(
            strategies=[{"name": "x", "rule": "category-skew", "k": 10,
                         "dimension": "nope", "category": "c00", "fraction": 0.5}]
        )
        with pytest.raises(InvalidSpecError):
            generate(SynthSpec.from_json_obj(bad_dim))

    def test_from_file(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec_obj()), encoding="utf-8")
        spec = SynthSpec.from_file(path)
        assert spec.n_ases == 200
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(InvalidSpecError):
            SynthSpec.from_file(bad)

    def test_category_tokens_sorted(self):
        tokens = category_tokens(12)
        assert tokens == sorted(tokens)
