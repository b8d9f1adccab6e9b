"""AS feature table, dimension schema, and file ingestion.

File formats
------------
Feature table: UTF-8 CSV with a header row. The first column must be
``asn``; every other column is one dimension. An empty cell means the
value is missing for that AS.

Vantage-point sets: either a newline-delimited list of ASNs or a CSV
with an ``asn`` column.

Labels: CSV with columns ``asn,label``, one row per (asn, label) pair.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    DuplicateAsnError,
    EmptySetError,
    MalformedCsvError,
    MalformedInputError,
    TypeMismatchError,
    UnknownLabelError,
)

NUMERICAL = "numerical"
CATEGORICAL = "categorical"
KINDS = (NUMERICAL, CATEGORICAL)

# Category groups, in canonical order.
CATEGORY_GROUPS = ("Location", "NetworkSize", "Topology", "IxpRelated", "NetworkType")

# Category assigned to inferred columns that are not part of the default
# schema. Only affects category-level correlation averaging.
FALLBACK_CATEGORY = "NetworkType"

CellValue = float | str


@dataclass(frozen=True)
class DimensionSchema:
    """Metadata for one AS characteristic (a bias dimension)."""

    name: str
    kind: str
    category: str
    bin_count: int = 10

    def __post_init__(self):
        if not self.name:
            raise ValueError("dimension name must be non-empty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r} for dimension {self.name!r}")
        if self.category not in CATEGORY_GROUPS:
            raise ValueError(
                f"unknown category {self.category!r} for dimension {self.name!r}"
            )
        if self.bin_count < 1:
            raise ValueError(f"bin_count must be positive for dimension {self.name!r}")


@dataclass(frozen=True)
class VantagePointSet:
    """A named set of ASNs (e.g. the peers of one platform or collector)."""

    name: str
    members: frozenset[int]
    metadata: Mapping[str, str] | None = None


@dataclass(frozen=True)
class LabelAssignment:
    """The set of characterization labels attached to one ASN."""

    asn: int
    labels: frozenset[str]


class FeatureTable:
    """Immutable ASN-indexed table of mixed numerical/categorical cells.

    Rows are validated at construction: ASNs are positive and unique,
    every row has exactly one cell per schema dimension, numerical cells
    are finite floats and categorical cells non-empty strings. ``None``
    encodes a missing value.
    """

    def __init__(
        self,
        schema: Sequence[DimensionSchema],
        rows: Mapping[int, Sequence[CellValue | None]],
    ):
        names = [d.name for d in schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate dimension names in schema")
        self._schema = tuple(schema)
        self._index = {d.name: i for i, d in enumerate(self._schema)}
        validated: dict[int, tuple[CellValue | None, ...]] = {}
        for asn, cells in rows.items():
            if not isinstance(asn, int) or asn <= 0:
                raise ValueError(f"ASN must be a positive integer, got {asn!r}")
            if len(cells) != len(self._schema):
                raise ValueError(
                    f"row for ASN {asn} has {len(cells)} cells, expected {len(self._schema)}"
                )
            checked = []
            for dim, cell in zip(self._schema, cells):
                checked.append(_check_cell(dim, cell, asn))
            validated[asn] = tuple(checked)
        self._rows = validated
        self._sorted_asns = tuple(sorted(validated))

    @property
    def schema(self) -> tuple[DimensionSchema, ...]:
        return self._schema

    @property
    def asns(self) -> tuple[int, ...]:
        """All ASNs in ascending order."""
        return self._sorted_asns

    def dimension_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self._schema)

    def dimension(self, name: str) -> DimensionSchema:
        return self._schema[self._index[name]]

    def cell(self, asn: int, dimension: str) -> CellValue | None:
        return self._rows[asn][self._index[dimension]]

    def column(self, dimension: str) -> dict[int, CellValue]:
        """Non-missing values of one dimension, keyed by ASN."""
        i = self._index[dimension]
        return {a: row[i] for a, row in self._rows.items() if row[i] is not None}

    def row(self, asn: int) -> tuple[CellValue | None, ...]:
        return self._rows[asn]

    def __len__(self) -> int:
        return len(self._rows)

    def __contains__(self, asn: int) -> bool:
        return asn in self._rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return self._schema == other._schema and self._rows == other._rows

    def to_csv(self, path: str | Path) -> None:
        """Write the table back out; reloading with the same schema is lossless."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["asn"] + [d.name for d in self._schema])
            for asn in self._sorted_asns:
                out = []
                for dim, cell in zip(self._schema, self._rows[asn]):
                    if cell is None:
                        out.append("")
                    elif dim.kind == NUMERICAL:
                        out.append(repr(cell))
                    else:
                        out.append(cell)
                writer.writerow([asn] + out)


def _check_cell(dim: DimensionSchema, cell, asn: int):
    if cell is None:
        return None
    if dim.kind == NUMERICAL:
        try:
            value = float(cell)
        except (TypeError, ValueError):
            raise TypeMismatchError(
                f"ASN {asn}, dimension {dim.name!r}: {cell!r} is not numeric"
            )
        if not math.isfinite(value):
            raise TypeMismatchError(
                f"ASN {asn}, dimension {dim.name!r}: value must be finite"
            )
        return value
    token = str(cell)
    if not token:
        raise TypeMismatchError(
            f"ASN {asn}, dimension {dim.name!r}: empty categorical token"
        )
    return token


def default_schema() -> tuple[DimensionSchema, ...]:
    """The 22 dimensions shipped with the package (editable data file)."""
    with resources.files("vpbias.data").joinpath("default_schema.csv").open(
        "r", encoding="utf-8"
    ) as fh:
        return _schema_from_reader(csv.DictReader(fh))


def load_schema(path: str | Path) -> tuple[DimensionSchema, ...]:
    """Load a dimension schema from a CSV with columns name,kind,category[,bin_count]."""
    with open(path, newline="", encoding="utf-8") as fh:
        return _schema_from_reader(csv.DictReader(fh))


def _schema_from_reader(reader: csv.DictReader) -> tuple[DimensionSchema, ...]:
    required = {"name", "kind", "category"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise MalformedCsvError("schema CSV needs columns name,kind,category")
    dims = []
    for row in reader:
        raw_bins = (row.get("bin_count") or "").strip()
        dims.append(
            DimensionSchema(
                name=row["name"].strip(),
                kind=row["kind"].strip(),
                category=row["category"].strip(),
                bin_count=int(raw_bins) if raw_bins else 10,
            )
        )
    return tuple(dims)


def load_feature_table(
    path: str | Path, schema: Sequence[DimensionSchema] | None = None
) -> FeatureTable:
    """Load and validate a feature table CSV.

    With an explicit schema, the file's columns must be exactly the schema
    names (any order); cells are typed per the schema. Without one, the
    schema is inferred: a column is numerical iff every non-empty cell
    parses as a finite real. Inferred columns reuse kind/category from the
    default schema when the name matches, else fall back to
    ``FALLBACK_CATEGORY``.

    Raises MalformedCsvError, DuplicateAsnError, or TypeMismatchError.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsvError(f"{path}: empty file")
        raw_rows = list(reader)

    header = [h.strip() for h in header]
    if not header or header[0] != "asn":
        raise MalformedCsvError(f"{path}: first column must be 'asn'")
    columns = header[1:]
    if len(set(columns)) != len(columns):
        raise MalformedCsvError(f"{path}: duplicate column names")

    cells_by_asn: dict[int, list[str | None]] = {}
    for lineno, row in enumerate(raw_rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue  # blank line
        if len(row) != len(header):
            raise MalformedCsvError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}"
            )
        raw_asn = row[0].strip()
        try:
            asn = int(raw_asn)
        except ValueError:
            raise MalformedCsvError(f"{path}:{lineno}: bad ASN {raw_asn!r}")
        if asn <= 0:
            raise MalformedCsvError(f"{path}:{lineno}: ASN must be positive")
        if asn in cells_by_asn:
            raise DuplicateAsnError(f"{path}: ASN {asn} appears more than once")
        cells_by_asn[asn] = [c.strip() or None for c in row[1:]]

    if schema is not None:
        by_name = {d.name: d for d in schema}
        if set(columns) != set(by_name):
            raise MalformedCsvError(
                f"{path}: columns {sorted(columns)} do not match schema "
                f"{sorted(by_name)}"
            )
        ordered = tuple(by_name[d.name] for d in schema)
        col_pos = {c: i for i, c in enumerate(columns)}
        order = [col_pos[d.name] for d in ordered]
    else:
        ordered = _infer_schema(columns, cells_by_asn)
        order = list(range(len(columns)))

    rows = {
        asn: [cells[i] for i in order] for asn, cells in cells_by_asn.items()
    }
    return FeatureTable(ordered, rows)


def _infer_schema(
    columns: Sequence[str], cells_by_asn: Mapping[int, Sequence[str | None]]
) -> tuple[DimensionSchema, ...]:
    defaults = {d.name: d for d in default_schema()}
    dims = []
    for i, name in enumerate(columns):
        numerical = True
        for cells in cells_by_asn.values():
            cell = cells[i]
            if cell is None:
                continue
            try:
                if not math.isfinite(float(cell)):
                    numerical = False
                    break
            except ValueError:
                numerical = False
                break
        kind = NUMERICAL if numerical else CATEGORICAL
        base = defaults.get(name)
        category = base.category if base is not None else FALLBACK_CATEGORY
        bins = base.bin_count if base is not None else 10
        dims.append(DimensionSchema(name=name, kind=kind, category=category, bin_count=bins))
    return tuple(dims)


def parse_asn_list(path: str | Path) -> list[int]:
    """Parse a raw ASN list file (newline-delimited or CSV with an asn column)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MalformedInputError(f"{path}: no ASNs found")
    first = lines[0]
    if "," in first or first.lower() == "asn":
        reader = csv.DictReader(text.splitlines())
        if reader.fieldnames is None or "asn" not in [f.strip() for f in reader.fieldnames]:
            raise MalformedInputError(f"{path}: CSV must have an 'asn' column")
        key = next(f for f in reader.fieldnames if f.strip() == "asn")
        raw = [row[key] for row in reader if (row[key] or "").strip()]
    else:
        raw = lines
    asns = []
    for token in raw:
        try:
            asn = int(token.strip())
        except ValueError:
            raise MalformedInputError(f"{path}: bad ASN {token!r}")
        if asn <= 0:
            raise MalformedInputError(f"{path}: ASN must be positive, got {asn}")
        asns.append(asn)
    return asns


def load_vantage_point_set(
    path: str | Path, table: FeatureTable, name: str | None = None
) -> tuple[VantagePointSet, list[int]]:
    """Load a VP set and resolve it against a feature table.

    ASNs absent from the table are not an error: they are returned as a
    sorted warning list and excluded from the member set (real peer lists
    routinely contain ASNs missing from a feature snapshot).
    """
    asns = parse_asn_list(path)
    members = frozenset(a for a in asns if a in table)
    unresolved = sorted(set(asns) - members)
    if not members:
        raise EmptySetError(f"{path}: no ASN resolves against the feature table")
    vps = VantagePointSet(name=name or Path(path).stem, members=members)
    return vps, unresolved


def load_labels(path: str | Path, score_table=None) -> list[LabelAssignment]:
    """Load per-AS label assignments from a CSV with columns asn,label.

    When a ComplexityScoreTable is supplied, every label must be present
    in it (UnknownLabelError otherwise).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"asn", "label"}.issubset(
            {f.strip() for f in reader.fieldnames}
        ):
            raise MalformedCsvError(f"{path}: need columns asn,label")
        grouped: dict[int, set[str]] = {}
        for lineno, row in enumerate(reader, start=2):
            raw_asn = (row.get("asn") or "").strip()
            label = (row.get("label") or "").strip()
            if not raw_asn and not label:
                continue
            try:
                asn = int(raw_asn)
            except ValueError:
                raise MalformedCsvError(f"{path}:{lineno}: bad ASN {raw_asn!r}")
            if asn <= 0:
                raise MalformedCsvError(f"{path}:{lineno}: ASN must be positive")
            if not label:
                raise MalformedCsvError(f"{path}:{lineno}: empty label")
            grouped.setdefault(asn, set()).add(label)

    if score_table is not None:
        for asn, labels in grouped.items():
            for label in labels:
                if label not in score_table:
                    raise UnknownLabelError(
                        f"ASN {asn}: label {label!r} not in score table"
                    )
    return [
        LabelAssignment(asn=a, labels=frozenset(ls)) for a, ls in sorted(grouped.items())
    ]
