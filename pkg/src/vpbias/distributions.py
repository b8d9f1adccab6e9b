"""Per-dimension probability distributions over a set of ASes.

Numerical dimensions are discretized with quantile bins computed on the
population and reused for every sample, so that population and sample
distributions are directly comparable. Categorical dimensions use the
canonical lexicographic token order; tokens a sample exhibits that the
population binning never saw fall into one trailing overflow cell.

Missing values are excluded from both numerator and denominator by
default. With ``missing_as_category=True`` they are counted in a
dedicated trailing cell instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import CATEGORICAL, NUMERICAL, FeatureTable
from .errors import NoDataError


@dataclass(frozen=True)
class BinningSpec:
    """Fixed cell layout for one dimension.

    Cell order: value bins (numerical) or categories (categorical), then
    one overflow cell for unseen tokens (categorical only), then one
    missing-value cell when ``missing_cell`` is set.
    """

    dimension: str
    kind: str
    edges: tuple[float, ...] | None = None
    categories: tuple[str, ...] | None = None
    missing_cell: bool = False

    @property
    def base_cells(self) -> int:
        if self.kind == NUMERICAL:
            return max(len(self.edges) - 1, 0)
        return len(self.categories)

    @property
    def total_cells(self) -> int:
        extra = 1 if self.kind == CATEGORICAL else 0  # overflow
        return self.base_cells + extra + (1 if self.missing_cell else 0)


@dataclass(frozen=True)
class Distribution:
    """Normalized histogram of one dimension over a member set."""

    dimension: str
    bins: BinningSpec
    probs: tuple[float, ...]
    support_count: int

    def to_json_obj(self) -> dict:
        obj = {"dimension": self.dimension, "kind": self.bins.kind}
        if self.bins.kind == NUMERICAL:
            obj["edges"] = list(self.bins.edges)
        else:
            obj["categories"] = list(self.bins.categories)
        obj["probs"] = list(self.probs)
        obj["support_count"] = self.support_count
        return obj


def build_binning(
    table: FeatureTable,
    population: set[int] | frozenset[int],
    dimension: str,
    missing_as_category: bool = False,
) -> BinningSpec:
    """Build the population-anchored binning for one dimension.

    Categorical: the lexicographically sorted tokens observed in the
    population. Numerical: quantile edges at j/bin_count of the
    population's non-missing values, duplicates collapsed (a constant
    column degenerates to the single bin [v, v]).

    Raises NoDataError when the population has no non-missing value.
    """
    if not population:
        raise NoDataError(f"{dimension}: empty population")
    dim = table.dimension(dimension)
    values = [table.cell(a, dimension) if a in table else None
              for a in sorted(population)]
    present = [v for v in values if v is not None]
    if not present:
        raise NoDataError(f"{dimension}: all values missing in population")

    if dim.kind == CATEGORICAL:
        return BinningSpec(
            dimension=dimension,
            kind=CATEGORICAL,
            categories=tuple(sorted(set(present))),
            missing_cell=missing_as_category,
        )

    qs = np.linspace(0.0, 1.0, dim.bin_count + 1)
    edges = np.unique(np.quantile(np.asarray(present, dtype=np.float64), qs))
    if len(edges) == 1:
        edges = np.array([edges[0], edges[0]])
    return BinningSpec(
        dimension=dimension,
        kind=NUMERICAL,
        edges=tuple(float(e) for e in edges),
        missing_cell=missing_as_category,
    )


def cell_codes(binning: BinningSpec, values: list) -> np.ndarray:
    """Map raw cell values (None = missing) to cell indices.

    Numerical values outside the edge range clamp into the first/last
    bin. Unseen categorical tokens map to the overflow cell. Missing
    values map to the missing cell when the binning has one, else -1.
    """
    n = len(values)
    codes = np.full(n, -1, dtype=np.int64)
    present = [i for i, v in enumerate(values) if v is not None]
    if binning.kind == NUMERICAL:
        if present:
            inner = np.asarray(binning.edges[1:-1], dtype=np.float64)
            vals = np.asarray([values[i] for i in present], dtype=np.float64)
            codes[present] = np.searchsorted(inner, vals, side="right")
    else:
        lookup = {c: i for i, c in enumerate(binning.categories)}
        overflow = len(binning.categories)
        for i in present:
            codes[i] = lookup.get(values[i], overflow)
    if binning.missing_cell:
        missing_idx = binning.total_cells - 1
        codes[codes == -1] = missing_idx
    return codes


def empirical_distribution(
    table: FeatureTable,
    members: set[int] | frozenset[int],
    binning: BinningSpec,
) -> Distribution:
    """Empirical distribution of one dimension over a member set.

    probs[i] = (members whose value falls in cell i) / support_count.
    Trailing all-zero extra cells (overflow/missing) are trimmed so the
    plain case yields exactly one probability per bin/category.

    Raises NoDataError when no member has a usable value.
    """
    values = [table.cell(a, binning.dimension) if a in table else None
              for a in sorted(members)]
    codes = cell_codes(binning, values)
    counts = counts_from_codes(codes, binning.total_cells)
    support = int(counts.sum())
    if support == 0:
        raise NoDataError(f"{binning.dimension}: no data in member set")
    probs = counts / support
    keep = binning.base_cells + (1 if binning.missing_cell else 0)
    length = len(probs)
    while length > keep and probs[length - 1] == 0.0:
        length -= 1
    return Distribution(
        dimension=binning.dimension,
        bins=binning,
        probs=tuple(float(p) for p in probs[:length]),
        support_count=support,
    )


def counts_from_codes(codes: np.ndarray, n_cells: int) -> np.ndarray:
    """Float64 per-cell counts; code -1 (missing, excluded) is dropped."""
    valid = codes[codes >= 0]
    return np.bincount(valid, minlength=n_cells).astype(np.float64)
