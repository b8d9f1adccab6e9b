"""Acquisition-complexity scoring of ASes from questionnaire-scored labels.

Each label carries the min/mean/max of expert answers on a -3 (prevents
peering) to +3 (peers easily) scale. An AS with several labels is
collapsed to a single raw score by first picking one statistic per label
(min, mean, or max) and then combining across labels: plain min, plain
max, or the merge rule, which forces -3 whenever any label statistic is
-3 (preferring -3 over +3), forces +3 when one is +3, and averages
otherwise. That gives nine policy variants; mean/merge is the default.
Raw scores are divided by 3 to normalize into [-1, +1].

The default score table ships as an editable CSV so users can substitute
their own questionnaire results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .data_model import FeatureTable, LabelAssignment
from .errors import EmptyLabelSetError, MalformedCsvError, UnknownLabelError
from .metrics import AggregationSpec, BiasMetricConfig

STATS = ("min", "mean", "max")
CROSS_MODES = ("min", "max", "merge")

NEUTRAL_STATS = None  # placeholder replaced below once LabelStats exists


@dataclass(frozen=True)
class LabelStats:
    """Questionnaire summary for one label on the [-3, +3] scale."""

    min: float
    mean: float
    max: float

    def __post_init__(self):
        if not -3.0 <= self.min <= self.mean <= self.max <= 3.0:
            raise ValueError(
                f"label stats must satisfy -3 <= min <= mean <= max <= 3, "
                f"got ({self.min}, {self.mean}, {self.max})"
            )


NEUTRAL_STATS = LabelStats(0.0, 0.0, 0.0)


class ComplexityScoreTable:
    """Per-label questionnaire statistics."""

    def __init__(self, entries: dict[str, LabelStats]):
        if not entries:
            raise ValueError("score table must not be empty")
        self.entries = dict(entries)

    def __contains__(self, label: str) -> bool:
        return label in self.entries

    def __getitem__(self, label: str) -> LabelStats:
        return self.entries[label]

    def labels(self) -> list[str]:
        return sorted(self.entries)

    @classmethod
    def from_csv(cls, path: str | Path) -> "ComplexityScoreTable":
        with open(path, newline="", encoding="utf-8") as fh:
            return cls._from_reader(csv.DictReader(fh), str(path))

    @classmethod
    def _from_reader(cls, reader: csv.DictReader, source: str) -> "ComplexityScoreTable":
        required = {"label", "min", "mean", "max"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MalformedCsvError(f"{source}: need columns label,min,mean,max")
        entries = {}
        for row in reader:
            label = row["label"].strip()
            if not label:
                raise MalformedCsvError(f"{source}: empty label")
            if label in entries:
                raise MalformedCsvError(f"{source}: duplicate label {label!r}")
            try:
                entries[label] = LabelStats(
                    float(row["min"]), float(row["mean"]), float(row["max"])
                )
            except ValueError as exc:
                raise MalformedCsvError(f"{source}: label {label!r}: {exc}")
        return cls(entries)


def default_score_table() -> ComplexityScoreTable:
    with resources.files("vpbias.data").joinpath("complexity_scores.csv").open(
        "r", encoding="utf-8"
    ) as fh:
        return ComplexityScoreTable._from_reader(csv.DictReader(fh), "complexity_scores.csv")


@dataclass(frozen=True)
class CollapsePolicy:
    per_label_stat: str = "mean"
    cross_label: str = "merge"

    def __post_init__(self):
        if self.per_label_stat not in STATS:
            raise ValueError(f"unknown per-label statistic {self.per_label_stat!r}")
        if self.cross_label not in CROSS_MODES:
            raise ValueError(f"unknown cross-label mode {self.cross_label!r}")


ALL_POLICIES = tuple(
    CollapsePolicy(stat, cross) for stat in STATS for cross in CROSS_MODES
)


@dataclass(frozen=True)
class ComplexityScore:
    asn: int
    raw: float
    normalized: float  # raw / 3

    def to_json_obj(self) -> dict:
        return {"asn": self.asn, "raw": self.raw, "normalized": self.normalized}


def collapse(
    labels,
    table: ComplexityScoreTable,
    policy: CollapsePolicy | None = None,
    neutral_unknown: bool = False,
) -> float:
    """Collapse a label set to one raw score in [-3, +3].

    With ``neutral_unknown`` a label absent from the table counts as
    (0, 0, 0) instead of raising UnknownLabelError; useful when the
    table covers only a subset of a large label vocabulary.
    """
    policy = policy or CollapsePolicy()
    if not labels:
        raise EmptyLabelSetError("cannot collapse an empty label set")
    stats = []
    for label in sorted(labels):
        if label in table:
            entry = table[label]
        elif neutral_unknown:
            entry = NEUTRAL_STATS
        else:
            raise UnknownLabelError(f"label {label!r} not in score table")
        stats.append(getattr(entry, policy.per_label_stat))
    if policy.cross_label == "min":
        return min(stats)
    if policy.cross_label == "max":
        return max(stats)
    if any(s == -3.0 for s in stats):
        return -3.0
    if any(s == 3.0 for s in stats):
        return 3.0
    return sum(stats) / len(stats)


def score_all(
    assignments: list[LabelAssignment],
    table: ComplexityScoreTable | None = None,
    policy: CollapsePolicy | None = None,
    neutral_unknown: bool = False,
) -> list[ComplexityScore]:
    """One collapsed score per assigned AS, ascending by ASN."""
    table = table or default_score_table()
    policy = policy or CollapsePolicy()
    out = []
    for assignment in sorted(assignments, key=lambda a: a.asn):
        raw = collapse(assignment.labels, table, policy, neutral_unknown)
        out.append(ComplexityScore(asn=assignment.asn, raw=raw, normalized=raw / 3.0))
    return out


@dataclass(frozen=True)
class CandidateComplexity:
    """Joined view of a candidate's bias impact and peering complexity."""

    asn: int
    bias_delta: float
    normalized_complexity: float

    def to_json_obj(self) -> dict:
        return {
            "asn": self.asn,
            "bias_delta": self.bias_delta,
            "normalized_complexity": self.normalized_complexity,
        }


def complexity_vs_bias(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    vps: set[int] | frozenset[int],
    candidates: set[int] | frozenset[int],
    scores: list[ComplexityScore],
    cfg: BiasMetricConfig | None = None,
    agg: AggregationSpec | None = None,
) -> tuple[list[CandidateComplexity], list[int]]:
    """Join extension deltas with complexity scores for scatter/heatmap export.

    Candidates without a complexity score are dropped and returned in the
    second element so callers can warn about them.
    """
    from .extension import score_candidates  # local import avoids a cycle

    by_asn = {s.asn: s.normalized for s in scores}
    ranked = score_candidates(table, population, vps, candidates, cfg, agg)
    records = []
    missing = []
    for cand in ranked:
        if cand.asn in by_asn:
            records.append(
                CandidateComplexity(
                    asn=cand.asn,
                    bias_delta=cand.bias_delta,
                    normalized_complexity=by_asn[cand.asn],
                )
            )
        else:
            missing.append(cand.asn)
    return records, sorted(missing)


def ecdf_points(values) -> list[tuple[float, float]]:
    """(value, cumulative fraction) pairs of the empirical CDF."""
    ordered = sorted(values)
    n = len(ordered)
    points = []
    for i, v in enumerate(ordered, start=1):
        if i == n or ordered[i] != v:
            points.append((float(v), i / n))
    return points
