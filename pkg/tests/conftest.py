"""Shared fixtures and independent oracle helpers.

The brute-force helpers here re-evaluate bias with the plain
bias_vector/aggregate path only; they intentionally know nothing about
the incremental evaluator the selection algorithms use.
"""

import numpy as np
import pytest

from vpbias.data_model import DimensionSchema, FeatureTable
from vpbias.metrics import AggregationSpec, BiasMetricConfig, bias_vector


@pytest.fixture
def toy_table():
    """100 people: 50/50 gender, 70/30 country, built for a 10-person
    sample with 8 men and 8 country-A members."""
    dims = [
        DimensionSchema("gender", "categorical", "NetworkType"),
        DimensionSchema("country", "categorical", "Location"),
    ]
    rows = {}
    for asn in range(1, 101):
        gender = "men" if asn <= 50 else "women"
        country = "A" if (asn <= 35 or 51 <= asn <= 85) else "B"
        rows[asn] = [gender, country]
    return FeatureTable(dims, rows)


@pytest.fixture
def toy_sample():
    # 8 men (6 country A, 2 B) + 2 women (both A) -> 80/20 and 80/20
    return frozenset({1, 2, 3, 4, 5, 6, 36, 37, 51, 52})


def make_random_table(rng: np.random.Generator, n_rows: int, missing_rate: float = 0.1):
    """Small mixed-kind table with missing cells, for oracle tests."""
    dims = [
        DimensionSchema("color", "categorical", "Location"),
        DimensionSchema("size", "numerical", "NetworkSize", bin_count=4),
        DimensionSchema("kind", "categorical", "NetworkType"),
    ]
    rows = {}
    for asn in range(1, n_rows + 1):
        color = None if rng.random() < missing_rate else f"c{rng.integers(0, 3)}"
        size = None if rng.random() < missing_rate else float(rng.lognormal(1.0, 1.0))
        kind = None if rng.random() < missing_rate else f"t{rng.integers(0, 4)}"
        rows[asn] = [color, size, kind]
    return FeatureTable(dims, rows)


def brute_force_bias(table, population, members, cfg=None, agg=None):
    """Aggregate bias via the plain report path."""
    cfg = cfg or BiasMetricConfig()
    agg = agg or AggregationSpec()
    return bias_vector(table, population, members, cfg, agg).aggregate


def brute_force_removal_scores(table, population, members, cfg=None, agg=None):
    """bias(V \\ {v}) for every member, each from a fresh recomputation."""
    return {
        v: brute_force_bias(table, population, set(members) - {v}, cfg, agg)
        for v in members
    }


def brute_force_best_removal(table, population, members, cfg=None, agg=None):
    """(argmin member, bias) with the smallest-ASN tie rule."""
    scores = brute_force_removal_scores(table, population, members, cfg, agg)
    best = min(sorted(scores), key=lambda v: (scores[v], v))
    return best, scores[best]


def brute_force_addition_scores(table, population, members, candidates, cfg=None, agg=None):
    """bias(V + {v}) for every candidate, each from a fresh recomputation."""
    return {
        v: brute_force_bias(table, population, set(members) | {v}, cfg, agg)
        for v in candidates
    }
