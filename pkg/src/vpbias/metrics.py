"""Distribution-distance metrics, the KS test, and bias reports.

The default bias score is a smoothed, bounded KL divergence: the sample
distribution Q is replaced by (1-w)*Q + w*P with w = 0.01 before
computing sum_i p_i * ln(p_i / q_i), and the result is divided by
ln(1/w) so scores live in [0, 1]. Total variation (with the 1/2 factor,
so it is also in [0, 1]) and max distance are available as alternatives.

All metrics use the natural logarithm and treat 0 * ln(0/x) as 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import kolmogorov

from .data_model import FeatureTable
from .distributions import Distribution, build_binning, empirical_distribution
from .errors import (
    BinMismatchError,
    EmptyPopulationError,
    EmptySampleError,
    InsufficientSupportError,
    NoAggregatableDimensionError,
    NoDataError,
)

METRIC_KL = "kl"
METRIC_TV = "tv"
METRIC_MAX = "max"
METRICS = (METRIC_KL, METRIC_TV, METRIC_MAX)

AGG_MEAN = "mean"
AGG_WEIGHTED = "weighted"
AGG_MAX = "max"
AGG_SUBSET = "subset"
AGG_MODES = (AGG_MEAN, AGG_WEIGHTED, AGG_MAX, AGG_SUBSET)


@dataclass(frozen=True)
class BiasMetricConfig:
    metric: str = METRIC_KL
    smoothing_w: float = 0.01
    normalize: bool = True

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not 0.0 < self.smoothing_w < 1.0:
            raise ValueError("smoothing_w must be in (0, 1)")

    def to_json_obj(self) -> dict:
        return {
            "metric": self.metric,
            "w": self.smoothing_w,
            "normalize": self.normalize,
        }


@dataclass(frozen=True)
class AggregationSpec:
    """How per-dimension scores combine into one scalar (default: mean)."""

    mode: str = AGG_MEAN
    weights: Mapping[str, float] | None = None
    subset: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.mode not in AGG_MODES:
            raise ValueError(f"unknown aggregation mode {self.mode!r}")
        if self.mode == AGG_WEIGHTED:
            if not self.weights or sum(self.weights.values()) <= 0:
                raise ValueError("weighted aggregation needs weights summing > 0")
            if any(w < 0 for w in self.weights.values()):
                raise ValueError("weights must be non-negative")
        if self.mode == AGG_SUBSET and not self.subset:
            raise ValueError("subset aggregation needs a non-empty dimension list")

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode,
            "weights": dict(self.weights) if self.weights else None,
            "subset": list(self.subset) if self.subset else None,
        }


@dataclass
class BiasReport:
    """Per-dimension bias scores plus their aggregate for one sample."""

    per_dimension: dict[str, float | None]
    aggregate: float
    metric_config: BiasMetricConfig
    aggregation: AggregationSpec

    def to_json_obj(self) -> dict:
        obj = self.metric_config.to_json_obj()
        obj["per_dimension"] = dict(self.per_dimension)
        obj["aggregate"] = self.aggregate
        obj["aggregation"] = self.aggregation.to_json_obj()
        return obj

    def radar_rows(self) -> list[dict]:
        """Fixed-order {dimension, score} rows for radar-plot export."""
        return [{"dimension": d, "score": s} for d, s in self.per_dimension.items()]


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    reject_at_5pct: bool

    def to_json_obj(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject_at_5pct": self.reject_at_5pct,
        }


# --- vector kernels (shared by the public ops and the fast evaluator) ---

def kl_smoothed_vec(p: np.ndarray, q: np.ndarray, w: float, normalize: bool) -> float:
    smoothed = (1.0 - w) * q + w * p
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(p / smoothed), 0.0)
    value = float(np.sum(terms))
    if normalize:
        value /= float(np.log(1.0 / w))
    return value


def total_variation_vec(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(p - q)))


def max_distance_vec(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.max(np.abs(p - q)))


def metric_from_vectors(p: np.ndarray, q: np.ndarray, cfg: BiasMetricConfig) -> float:
    if cfg.metric == METRIC_KL:
        return kl_smoothed_vec(p, q, cfg.smoothing_w, cfg.normalize)
    if cfg.metric == METRIC_TV:
        return total_variation_vec(p, q)
    return max_distance_vec(p, q)


def _aligned(P: Distribution, Q: Distribution) -> tuple[np.ndarray, np.ndarray]:
    if P.bins != Q.bins:
        raise BinMismatchError(
            f"distributions over different binnings: {P.dimension!r} vs {Q.dimension!r}"
        )
    n = max(len(P.probs), len(Q.probs))
    p = np.zeros(n, dtype=np.float64)
    q = np.zeros(n, dtype=np.float64)
    p[: len(P.probs)] = P.probs
    q[: len(Q.probs)] = Q.probs
    return p, q


# --- public metric operations ---

def kl_smoothed(P: Distribution, Q: Distribution, cfg: BiasMetricConfig | None = None) -> float:
    """Smoothed KL divergence of Q from P, optionally normalized to [0, 1]."""
    cfg = cfg or BiasMetricConfig()
    p, q = _aligned(P, Q)
    return kl_smoothed_vec(p, q, cfg.smoothing_w, cfg.normalize)


def total_variation(P: Distribution, Q: Distribution) -> float:
    """Total variation distance: half the L1 distance, in [0, 1]."""
    p, q = _aligned(P, Q)
    return total_variation_vec(p, q)


def max_distance(P: Distribution, Q: Distribution) -> float:
    """Largest per-cell probability gap, in [0, 1]."""
    p, q = _aligned(P, Q)
    return max_distance_vec(p, q)


def ks_test(P: Distribution, Q: Distribution, n_p: int, n_q: int) -> KsResult:
    """Two-sample KS test over the canonical cell order.

    The statistic is the max absolute gap between the two cumulative
    vectors; the p-value comes from the asymptotic two-sample Kolmogorov
    distribution with effective n = n_p * n_q / (n_p + n_q).
    """
    if n_p <= 0 or n_q <= 0:
        raise InsufficientSupportError("KS test needs non-zero support on both sides")
    p, q = _aligned(P, Q)
    statistic = float(np.max(np.abs(np.cumsum(p) - np.cumsum(q))))
    effective_n = n_p * n_q / (n_p + n_q)
    p_value = float(np.clip(kolmogorov(np.sqrt(effective_n) * statistic), 0.0, 1.0))
    return KsResult(statistic=statistic, p_value=p_value, reject_at_5pct=p_value < 0.05)


# --- aggregation ---

def aggregate_values(
    names: Sequence[str], values: Sequence[float | None], spec: AggregationSpec
) -> float:
    """Combine per-dimension scores; null scores are excluded, never zeroed."""
    if spec.mode == AGG_SUBSET:
        wanted = set(spec.subset)
        pairs = [(n, v) for n, v in zip(names, values) if n in wanted and v is not None]
        if not pairs:
            raise NoAggregatableDimensionError("no non-null score in subset")
        vals = [v for _, v in pairs]
        return sum(vals) / len(vals)
    if spec.mode == AGG_WEIGHTED:
        num = 0.0
        den = 0.0
        for n, v in zip(names, values):
            w = spec.weights.get(n, 0.0)
            if v is None or w == 0.0:
                continue
            num += w * v
            den += w
        if den == 0.0:
            raise NoAggregatableDimensionError("no weighted non-null score")
        return num / den
    vals = [v for v in values if v is not None]
    if not vals:
        raise NoAggregatableDimensionError("every per-dimension score is null")
    if spec.mode == AGG_MAX:
        return max(vals)
    return sum(vals) / len(vals)


def aggregate(report: BiasReport, spec: AggregationSpec) -> float:
    """Recompute the scalar aggregate of a report under a given spec."""
    names = list(report.per_dimension)
    values = [report.per_dimension[n] for n in names]
    return aggregate_values(names, values, spec)


# --- report construction ---

def bias_vector(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    sample: set[int] | frozenset[int],
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
    missing_as_category: bool = False,
) -> BiasReport:
    """Per-dimension bias of a sample against a population.

    For every schema dimension the binning is built on the population, the
    two empirical distributions are compared with the configured metric,
    and dimensions without data (on either side) score null and stay out
    of the aggregate.
    """
    cfg = cfg or BiasMetricConfig()
    agg = agg or AggregationSpec()
    if not population:
        raise EmptyPopulationError("population is empty")
    if not sample:
        raise EmptySampleError("sample is empty")
    extraneous = set(sample) - set(population)
    if extraneous:
        warnings.warn(
            f"{len(extraneous)} sample member(s) outside the population",
            stacklevel=2,
        )
    scores: dict[str, float | None] = {}
    for dim in table.schema:
        try:
            binning = build_binning(table, population, dim.name, missing_as_category)
            P = empirical_distribution(table, population, binning)
            Q = empirical_distribution(table, sample, binning)
        except NoDataError:
            scores[dim.name] = None
            continue
        if cfg.metric == METRIC_KL:
            scores[dim.name] = kl_smoothed(P, Q, cfg)
        elif cfg.metric == METRIC_TV:
            scores[dim.name] = total_variation(P, Q)
        else:
            scores[dim.name] = max_distance(P, Q)
    value = aggregate_values(list(scores), list(scores.values()), agg)
    return BiasReport(
        per_dimension=scores, aggregate=value, metric_config=cfg, aggregation=agg
    )


def ks_vector(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    sample: set[int] | frozenset[int],
    missing_as_category: bool = False,
) -> dict[str, KsResult | None]:
    """Per-dimension KS test of sample vs population distributions."""
    if not population:
        raise EmptyPopulationError("population is empty")
    if not sample:
        raise EmptySampleError("sample is empty")
    results: dict[str, KsResult | None] = {}
    for dim in table.schema:
        try:
            binning = build_binning(table, population, dim.name, missing_as_category)
            P = empirical_distribution(table, population, binning)
            Q = empirical_distribution(table, sample, binning)
        except NoDataError:
            results[dim.name] = None
            continue
        results[dim.name] = ks_test(P, Q, P.support_count, Q.support_count)
    return results
