"""Ranking of candidate ASes by the bias change their addition causes.

Every candidate v gets bias_delta = B(V + {v}) - B(V); negative deltas
mean the addition makes the set more representative. The sorting variant
adds the n best candidates as scored against the original V; the greedy
variant re-scores after every addition, which is far more expensive on
realistic candidate pools (the pool is usually the whole population).

Stub networks (single upstream, by default neighbors_total == 1) can be
excluded since they rarely make useful vantage points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .data_model import FeatureTable
from .errors import (
    EmptyCandidatesError,
    InvalidNError,
    MissingStubDimensionError,
    NoAggregatableDimensionError,
)
from .evaluator import BiasEvaluator
from .metrics import AggregationSpec, BiasMetricConfig, aggregate_values

DEFAULT_STUB_DIMENSION = "neighbors_total"


@dataclass(frozen=True)
class ExtensionCandidate:
    asn: int
    bias_delta: float
    relative_delta_pct: float | None  # 100 * B(V+{v}) / B(V); None when B(V) = 0

    def to_json_obj(self) -> dict:
        return {
            "asn": self.asn,
            "bias_delta": self.bias_delta,
            "relative_delta_pct": self.relative_delta_pct,
        }


@dataclass
class ExtensionResult:
    selected: frozenset[int]
    added: list[int]
    trajectory: list[tuple[int, float]]
    algorithm: str

    def to_json_obj(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": len(self.added),
            "added": list(self.added),
            "selected": sorted(self.selected),
            "trajectory": [[size, bias] for size, bias in self.trajectory],
        }


def _prepare(table, population, vps, candidates, exclude_stubs, stub_dimension):
    candidates = set(candidates)
    if not candidates:
        raise EmptyCandidatesError("no extension candidates given")
    overlap = candidates & set(vps)
    if overlap:
        raise ValueError(f"{len(overlap)} candidate(s) already in the vantage-point set")
    unknown = {c for c in candidates if c not in table}
    if unknown:
        raise ValueError(f"{len(unknown)} candidate(s) not in the feature table")
    outside = candidates - set(population)
    if outside:
        warnings.warn(
            f"{len(outside)} candidate(s) outside the population", stacklevel=3
        )
    if exclude_stubs:
        if stub_dimension not in table.dimension_names():
            raise MissingStubDimensionError(
                f"stub exclusion needs dimension {stub_dimension!r}"
            )
        candidates = {
            c for c in candidates
            if not (c in table and table.cell(c, stub_dimension) == 1)
        }
        if not candidates:
            raise EmptyCandidatesError("every candidate is a stub")
    return candidates


def _addition_aggregate(ev, scores, tables, asn, agg):
    values = []
    for dim in ev.dim_names:
        if dim not in ev.binnings:
            values.append(None)
            continue
        code = ev.code_of(dim, asn)
        if code < 0:
            values.append(scores[dim])
        else:
            values.append(float(tables[dim][code]))
    try:
        return aggregate_values(ev.dim_names, values, agg)
    except NoAggregatableDimensionError:
        return math.inf


def _addition_tables(ev, state):
    return {
        dim: ev.addition_table(dim, state.counts[dim], state.supports[dim])
        for dim in ev.binnings
    }


def score_candidates(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    candidates: set[int] | frozenset[int],
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    exclude_stubs: bool = False,
    stub_dimension: str = DEFAULT_STUB_DIMENSION,
    missing_as_category: bool = False,
) -> list[ExtensionCandidate]:
    """Rank candidates by the aggregate bias change of adding each to vps.

    Returns one entry per non-excluded candidate, ascending by bias_delta
    (ties by smallest ASN), so the head of the list is the best addition.
    """
    agg = agg or AggregationSpec()
    candidates = _prepare(table, population, vps, candidates, exclude_stubs, stub_dimension)
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    state = ev.state_of(vps)
    scores = ev.dim_scores(state)
    base = ev.aggregate_of(scores, agg)
    tables = _addition_tables(ev, state)
    ranked = []
    for asn in sorted(candidates):
        after = _addition_aggregate(ev, scores, tables, asn, agg)
        ranked.append(
            ExtensionCandidate(
                asn=asn,
                bias_delta=after - base,
                relative_delta_pct=(100.0 * after / base) if base > 0 else None,
            )
        )
    ranked.sort(key=lambda c: (c.bias_delta, c.asn))
    return ranked


def sorting_extend(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    candidates: set[int] | frozenset[int],
    n: int,
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    exclude_stubs: bool = False,
    stub_dimension: str = DEFAULT_STUB_DIMENSION,
    missing_as_category: bool = False,
) -> ExtensionResult:
    """Add the n candidates with the lowest single-addition bias.

    Candidates are scored once against the original set; the trajectory
    records the actual bias after each addition in that order.
    """
    agg = agg or AggregationSpec()
    ranked = score_candidates(
        table, population, vps, candidates, cfg, agg,
        exclude_stubs, stub_dimension, missing_as_category,
    )
    if not 1 <= n <= len(ranked):
        raise InvalidNError(f"n={n} must satisfy 1 <= n <= {len(ranked)} candidates")
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    members = sorted(vps)
    state = ev.state_of(members)
    scores = ev.dim_scores(state)
    trajectory = [(len(members), ev.aggregate_of(scores, agg))]
    added = []
    for cand in ranked[:n]:
        ev.add(state, cand.asn)
        members.append(cand.asn)
        added.append(cand.asn)
        for dim in ev.binnings:
            if ev.code_of(dim, cand.asn) >= 0:
                scores[dim] = ev.dim_score(dim, state.counts[dim], state.supports[dim])
        trajectory.append((len(members), ev.aggregate_of(scores, agg)))
    return ExtensionResult(frozenset(members), added, trajectory, "sorting")


def greedy_extend(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    candidates: set[int] | frozenset[int],
    n: int,
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    exclude_stubs: bool = False,
    stub_dimension: str = DEFAULT_STUB_DIMENSION,
    missing_as_category: bool = False,
) -> ExtensionResult:
    """Repeatedly add the candidate minimizing the resulting aggregate bias.

    Each of the n iterations re-scores every remaining candidate, so with
    a population-sized pool this is much costlier than the sorting
    variant; use it for small pools or small n.
    """
    agg = agg or AggregationSpec()
    remaining = _prepare(table, population, vps, candidates, exclude_stubs, stub_dimension)
    if not 1 <= n <= len(remaining):
        raise InvalidNError(f"n={n} must satisfy 1 <= n <= {len(remaining)} candidates")
    ev = BiasEvaluator(table, population, cfg, missing_as_category)
    members = sorted(vps)
    state = ev.state_of(members)
    scores = ev.dim_scores(state)
    trajectory = [(len(members), ev.aggregate_of(scores, agg))]
    added = []
    for _ in range(n):
        tables = _addition_tables(ev, state)
        best_asn = None
        best = math.inf
        for asn in sorted(remaining):  # ascending ASN: first strict minimum wins
            value = _addition_aggregate(ev, scores, tables, asn, agg)
            if value < best:
                best = value
                best_asn = asn
        remaining.remove(best_asn)
        ev.add(state, best_asn)
        members.append(best_asn)
        added.append(best_asn)
        for dim in ev.binnings:
            if ev.code_of(dim, best_asn) >= 0:
                scores[dim] = ev.dim_score(dim, state.counts[dim], state.supports[dim])
        trajectory.append((len(members), ev.aggregate_of(scores, agg)))
    return ExtensionResult(frozenset(members), added, trajectory, "greedy")
