"""Mixed-type association matrix and latency percentile-error evaluation.

Associations use the method the pair of kinds dictates: |Pearson| for two
numerical dimensions, the correlation ratio for numerical vs categorical,
and Cramer's V (bias-unadjusted, no continuity correction) for two
categorical dimensions. All three live on one [0, 1] scale. Pairs are
computed on pairwise-complete observations; fewer than 3 complete rows,
or a variable that is constant on them, yields a null entry.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_model import CATEGORY_GROUPS, NUMERICAL, FeatureTable
from .errors import (
    AllZeroGroundTruthError,
    EmptyEstimateSetError,
    EmptyPopulationError,
    MalformedCsvError,
)

MIN_COMPLETE_OBS = 3

METHOD_PEARSON = "pearson"
METHOD_CORRELATION_RATIO = "correlation-ratio"
METHOD_CRAMERS_V = "cramers-v"


@dataclass
class CorrelationMatrix:
    dimensions: tuple[str, ...]
    matrix: list[list[float | None]]
    methods: list[list[str | None]]
    categories: tuple[str, ...]
    category_matrix: list[list[float | None]]

    def pair(self, dim_a: str, dim_b: str) -> float | None:
        i = self.dimensions.index(dim_a)
        j = self.dimensions.index(dim_b)
        return self.matrix[i][j]

    def to_json_obj(self) -> dict:
        return {
            "dimensions": list(self.dimensions),
            "matrix": [list(row) for row in self.matrix],
            "methods": [list(row) for row in self.methods],
            "categories": list(self.categories),
            "category_matrix": [list(row) for row in self.category_matrix],
        }


def _abs_pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.sum(xc * xc)) * float(np.sum(yc * yc)))
    return abs(float(np.sum(xc * yc)) / denom)


def _correlation_ratio(values: np.ndarray, groups: list) -> float:
    mean = float(values.mean())
    ss_total = float(np.sum((values - mean) ** 2))
    ss_between = 0.0
    for g in set(groups):
        member = values[[i for i, t in enumerate(groups) if t == g]]
        ss_between += len(member) * (float(member.mean()) - mean) ** 2
    return math.sqrt(ss_between / ss_total)


def _cramers_v(a: list, b: list) -> float:
    cats_a = sorted(set(a))
    cats_b = sorted(set(b))
    idx_a = {c: i for i, c in enumerate(cats_a)}
    idx_b = {c: i for i, c in enumerate(cats_b)}
    observed = np.zeros((len(cats_a), len(cats_b)))
    for x, y in zip(a, b):
        observed[idx_a[x], idx_b[y]] += 1.0
    n = observed.sum()
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / n
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    return math.sqrt(chi2 / (n * (min(len(cats_a), len(cats_b)) - 1)))


def correlation_matrix(
    table: FeatureTable, population: set[int] | frozenset[int]
) -> CorrelationMatrix:
    """Pairwise association of all dimensions over a population.

    Also averages the pairwise values by category group; the group
    diagonal averages distinct-dimension pairs within the group (the
    trivial self-pair of a single dimension is excluded, so diagonal
    entries are generally below 1).
    """
    if not population:
        raise EmptyPopulationError("population is empty")
    asns = [a for a in sorted(population) if a in table]
    dims = table.schema
    columns = {d.name: [table.cell(a, d.name) for a in asns] for d in dims}
    n_dims = len(dims)
    matrix: list[list[float | None]] = [[None] * n_dims for _ in range(n_dims)]
    methods: list[list[str | None]] = [[None] * n_dims for _ in range(n_dims)]

    for i in range(n_dims):
        for j in range(i, n_dims):
            a, b = dims[i], dims[j]
            pairs = [
                (x, y)
                for x, y in zip(columns[a.name], columns[b.name])
                if x is not None and y is not None
            ]
            value, method = _associate(a.kind, b.kind, pairs)
            methods[i][j] = methods[j][i] = method
            matrix[i][j] = matrix[j][i] = value

    categories = tuple(c for c in CATEGORY_GROUPS if any(d.category == c for d in dims))
    cat_matrix: list[list[float | None]] = []
    for ci, ca in enumerate(categories):
        row: list[float | None] = []
        for cb in categories:
            values = []
            for i in range(n_dims):
                if dims[i].category != ca:
                    continue
                for j in range(n_dims):
                    if dims[j].category != cb or i == j:
                        continue
                    if ca == cb and j <= i:
                        continue  # count each within-group pair once
                    if matrix[i][j] is not None:
                        values.append(matrix[i][j])
            row.append(sum(values) / len(values) if values else None)
        cat_matrix.append(row)

    return CorrelationMatrix(
        dimensions=tuple(d.name for d in dims),
        matrix=matrix,
        methods=methods,
        categories=categories,
        category_matrix=cat_matrix,
    )


def _associate(kind_a: str, kind_b: str, pairs: list) -> tuple[float | None, str]:
    numerical = (kind_a == NUMERICAL, kind_b == NUMERICAL)
    if all(numerical):
        method = METHOD_PEARSON
    elif any(numerical):
        method = METHOD_CORRELATION_RATIO
    else:
        method = METHOD_CRAMERS_V
    if len(pairs) < MIN_COMPLETE_OBS:
        return None, method
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    # A variable constant on the complete observations carries no signal.
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        return None, method
    if method == METHOD_PEARSON:
        value = _abs_pearson(np.asarray(xs, float), np.asarray(ys, float))
    elif method == METHOD_CORRELATION_RATIO:
        if numerical[0]:
            value = _correlation_ratio(np.asarray(xs, float), ys)
        else:
            value = _correlation_ratio(np.asarray(ys, float), xs)
    else:
        value = _cramers_v(xs, ys)
    return min(max(value, 0.0), 1.0), method


@dataclass(frozen=True)
class LatencyDistribution:
    """Median latency per AS, milliseconds."""

    samples: dict[int, float]

    def __post_init__(self):
        for asn, value in self.samples.items():
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"ASN {asn}: latency must be finite and >= 0")


def load_latency_csv(path: str | Path) -> LatencyDistribution:
    """Load a latency file with columns asn,latency_ms."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"asn", "latency_ms"}.issubset(
            {f.strip() for f in reader.fieldnames}
        ):
            raise MalformedCsvError(f"{path}: need columns asn,latency_ms")
        samples = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                asn = int(row["asn"].strip())
                value = float(row["latency_ms"].strip())
            except (ValueError, AttributeError):
                raise MalformedCsvError(f"{path}:{lineno}: bad row")
            samples[asn] = value
    return LatencyDistribution(samples)


@dataclass
class PercentileErrors:
    per_percentile: dict[int, float | None]
    mean_error: float

    def to_json_obj(self) -> dict:
        return {
            "per_percentile": {str(k): v for k, v in self.per_percentile.items()},
            "mean_error": self.mean_error,
        }


def percentile_relative_error(
    ground_truth: LatencyDistribution,
    estimate_members: set[int] | frozenset[int],
    estimate_values: LatencyDistribution,
    percentiles=None,
) -> PercentileErrors:
    """Relative error of the member subset's latency percentiles.

    For each percentile pi, err = |L_S(pi) - L(pi)| / L(pi), where L is
    over all ground-truth ASes and L_S over the members' values in
    ``estimate_values`` (pass the ground truth itself to simulate, or an
    independently measured map). Percentiles use linear interpolation.
    Zero ground-truth percentiles yield null entries; the mean is over
    the non-null ones.
    """
    if not ground_truth.samples:
        raise ValueError("ground truth is empty")
    percentiles = tuple(percentiles) if percentiles is not None else tuple(range(1, 100))
    if not percentiles or any(not 1 <= p <= 99 for p in percentiles):
        raise ValueError("percentiles must be integers in 1..99")
    member_values = [
        estimate_values.samples[a]
        for a in sorted(estimate_members)
        if a in estimate_values.samples
    ]
    if not member_values:
        raise EmptyEstimateSetError("no estimate member has a latency value")
    truth = np.asarray(sorted(ground_truth.samples.values()), dtype=np.float64)
    estimate = np.asarray(member_values, dtype=np.float64)
    errors: dict[int, float | None] = {}
    for p in percentiles:
        reference = float(np.percentile(truth, p))
        if reference == 0.0:
            errors[p] = None
            continue
        measured = float(np.percentile(estimate, p))
        errors[p] = abs(measured - reference) / reference
    valid = [e for e in errors.values() if e is not None]
    if not valid:
        raise AllZeroGroundTruthError("every requested percentile of the ground truth is 0")
    return PercentileErrors(per_percentile=errors, mean_error=sum(valid) / len(valid))
