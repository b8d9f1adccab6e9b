"""Subset selection that reduces bias: greedy and sorting removal, plus
seeded random-sampling baselines.

Greedy repeatedly drops the member whose removal lowers the aggregate
bias the most, which costs O((|V|-k) * |V|^2) bias evaluations done
incrementally here. Sorting scores every member once against the
original set and then drops the |V|-k members with the lowest
single-removal bias without re-scoring, an O(|V|^2) shortcut that
ignores combined effects. Neither the objective nor the trajectory is
monotone: bias may rise again once sets get small.

Ties are always broken toward the smallest ASN so runs are reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data_model import FeatureTable
from .errors import InvalidKError, NoAggregatableDimensionError
from .evaluator import BiasEvaluator
from .metrics import AggregationSpec, BiasMetricConfig, aggregate_values

ALGO_GREEDY = "greedy"
ALGO_SORTING = "sorting"
ALGO_RANDOM = "random"


@dataclass
class SubsampleResult:
    selected: frozenset[int]
    trajectory: list[tuple[int, float]]
    algorithm: str
    removal_scores: dict[int, float] | None = field(default=None, repr=False)

    def to_json_obj(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "k": len(self.selected),
            "selected": sorted(self.selected),
            "trajectory": [[size, bias] for size, bias in self.trajectory],
        }


@dataclass(frozen=True)
class RandomBaseline:
    sample_size: int
    iterations: int
    mean_bias: float
    ci95_half_width: float
    min_bias: float
    max_bias: float

    def to_json_obj(self) -> dict:
        return {
            "sample_size": self.sample_size,
            "iterations": self.iterations,
            "mean_bias": self.mean_bias,
            "ci95_half_width": self.ci95_half_width,
            "min_bias": self.min_bias,
            "max_bias": self.max_bias,
        }


def _check_inputs(population, vps, k):
    if not 1 <= k < len(vps):
        raise InvalidKError(f"k={k} must satisfy 1 <= k < |V|={len(vps)}")
    outside = set(vps) - set(population)
    if outside:
        warnings.warn(
            f"{len(outside)} vantage point(s) outside the population", stacklevel=3
        )


def _candidate_aggregate(ev, scores, tables, state, asn, agg):
    """Aggregate bias after removing one member, from the what-if tables."""
    values = []
    for dim in ev.dim_names:
        if dim not in ev.binnings:
            values.append(None)
            continue
        code = ev.code_of(dim, asn)
        if code < 0:
            values.append(scores[dim])
        else:
            v = tables[dim][code]
            values.append(None if math.isnan(v) else float(v))
    try:
        return aggregate_values(ev.dim_names, values, agg)
    except NoAggregatableDimensionError:
        return math.inf  # removal would leave nothing to score


def _refresh(ev, scores, state, asn):
    """Recompute the per-dimension scores the removal/addition of asn touched."""
    for dim in ev.binnings:
        if ev.code_of(dim, asn) >= 0:
            scores[dim] = ev.dim_score(dim, state.counts[dim], state.supports[dim])


def greedy_subsample(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    k: int,
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    early_exit: bool = False,
    missing_as_category: bool = False,
) -> SubsampleResult:
    """Iteratively remove the member whose removal minimizes aggregate bias.

    The trajectory records (set size, aggregate bias) for the initial set
    and after every removal. With ``early_exit`` the loop stops as soon as
    no removal decreases the bias, so more than k members may remain.
    """
    agg = agg or AggregationSpec()
    _check_inputs(population, vps, k)
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    members = sorted(vps)
    state = ev.state_of(members)
    scores = ev.dim_scores(state)
    current = ev.aggregate_of(scores, agg)
    trajectory = [(len(members), current)]

    while len(members) > k:
        tables = {
            dim: ev.removal_table(dim, state.counts[dim], state.supports[dim])
            for dim in ev.binnings
        }
        best_asn = None
        best = math.inf
        for asn in members:  # ascending ASN: first strict minimum wins ties
            value = _candidate_aggregate(ev, scores, tables, state, asn, agg)
            if value < best:
                best = value
                best_asn = asn
        if best_asn is None:
            raise NoAggregatableDimensionError("no removable member leaves data to score")
        if early_exit and best >= current:
            break
        ev.remove(state, best_asn)
        members.remove(best_asn)
        _refresh(ev, scores, state, best_asn)
        current = ev.aggregate_of(scores, agg)
        trajectory.append((len(members), current))

    return SubsampleResult(frozenset(members), trajectory, ALGO_GREEDY)


def sorting_subsample(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    k: int,
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    missing_as_category: bool = False,
) -> SubsampleResult:
    """Score each member's single-removal bias once, then drop the lowest.

    B_v = bias(V \\ {v}) is computed against the original set only; the
    |V|-k members with the lowest B_v are removed in ascending (B_v, ASN)
    order with no further scoring.
    """
    agg = agg or AggregationSpec()
    _check_inputs(population, vps, k)
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    members = sorted(vps)
    state = ev.state_of(members)
    scores = ev.dim_scores(state)
    current = ev.aggregate_of(scores, agg)
    trajectory = [(len(members), current)]

    tables = {
        dim: ev.removal_table(dim, state.counts[dim], state.supports[dim])
        for dim in ev.binnings
    }
    removal_scores = {
        asn: _candidate_aggregate(ev, scores, tables, state, asn, agg)
        for asn in members
    }
    doomed = sorted(members, key=lambda a: (removal_scores[a], a))[: len(members) - k]
    for asn in doomed:
        ev.remove(state, asn)
        members.remove(asn)
        _refresh(ev, scores, state, asn)
        trajectory.append((len(members), ev.aggregate_of(scores, agg)))

    return SubsampleResult(
        frozenset(members), trajectory, ALGO_SORTING, removal_scores=removal_scores
    )


def random_baseline(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    source: set[int] | frozenset[int],
    k: int,
    iterations: int = 100,
    seed: int = 0,
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    missing_as_category: bool = False,
) -> RandomBaseline:
    """Mean bias of seeded uniform k-subsets of ``source``.

    Returns the mean over ``iterations`` draws together with a normal-
    approximation 95% confidence half-width (1.96 * sd / sqrt(n)) and the
    min/max observed bias. Identical seeds reproduce identical results.
    """
    agg = agg or AggregationSpec()
    if not 1 <= k <= len(source):
        raise InvalidKError(f"k={k} must satisfy 1 <= k <= |source|={len(source)}")
    if iterations < 1:
        raise InvalidKError("iterations must be >= 1")
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    pool = np.array(sorted(source), dtype=np.int64)
    rng = np.random.default_rng(seed)
    biases = np.empty(iterations)
    for i in range(iterations):
        subset = pool[rng.choice(len(pool), size=k, replace=False)]
        biases[i] = ev.score_members(subset.tolist(), agg)
    sd = float(np.std(biases, ddof=1)) if iterations > 1 else 0.0
    return RandomBaseline(
        sample_size=k,
        iterations=iterations,
        mean_bias=float(np.mean(biases)),
        ci95_half_width=float(1.96 * sd / math.sqrt(iterations)),
        min_bias=float(np.min(biases)),
        max_bias=float(np.max(biases)),
    )
