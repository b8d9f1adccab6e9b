"""Fast repeated bias evaluation against a fixed population.

Subset-selection algorithms evaluate the bias of thousands of sets that
differ by one member. Rebuilding binnings and distributions each time is
wasteful: binnings depend only on the population, and removing or adding
one member changes each dimension's counts in at most one cell. This
evaluator precomputes the population distributions and per-AS cell codes
once and maintains per-dimension counts incrementally.

It deliberately reuses the exact vector kernels of ``metrics`` so its
scores are bit-identical to a fresh ``bias_vector`` recomputation (the
test suite cross-checks this).
"""

from __future__ import annotations

import numpy as np

from .data_model import FeatureTable
from .distributions import build_binning, cell_codes, counts_from_codes
from .errors import NoDataError
from .metrics import AggregationSpec, BiasMetricConfig, aggregate_values, metric_from_vectors


class SetState:
    """Mutable per-dimension counts for one member set."""

    def __init__(self, counts: dict[str, np.ndarray], supports: dict[str, int]):
        self.counts = counts
        self.supports = supports


class BiasEvaluator:
    def __init__(
        self,
        table: FeatureTable,
        population: set[int] | frozenset[int],
        cfg: BiasMetricConfig | None = None,
        missing_as_category: bool = False,
    ):
        self.table = table
        self.cfg = cfg or BiasMetricConfig()
        self.dim_names = list(table.dimension_names())
        self._pos = {a: i for i, a in enumerate(table.asns)}
        self.binnings = {}
        self.p_vecs: dict[str, np.ndarray] = {}
        self.codes: dict[str, np.ndarray] = {}
        self.n_cells: dict[str, int] = {}
        ordered = list(table.asns)
        population = set(population)
        for dim in table.schema:
            try:
                binning = build_binning(table, population, dim.name, missing_as_category)
            except NoDataError:
                continue  # dimension stays null for every sample
            codes = cell_codes(
                binning, [table.cell(a, dim.name) for a in ordered]
            )
            cells = binning.total_cells
            pop_idx = np.fromiter(
                (self._pos[a] for a in sorted(population) if a in self._pos),
                dtype=np.int64,
            )
            pop_counts = counts_from_codes(codes[pop_idx], cells)
            support = int(pop_counts.sum())
            if support == 0:
                continue
            self.binnings[dim.name] = binning
            self.codes[dim.name] = codes
            self.n_cells[dim.name] = cells
            self.p_vecs[dim.name] = pop_counts / support

    @property
    def active_dims(self) -> list[str]:
        return [d for d in self.dim_names if d in self.binnings]

    def code_of(self, dim: str, asn: int) -> int:
        return int(self.codes[dim][self._pos[asn]])

    def state_of(self, members) -> SetState:
        idx = np.fromiter((self._pos[a] for a in sorted(members)), dtype=np.int64)
        counts = {}
        supports = {}
        for dim in self.binnings:
            c = counts_from_codes(self.codes[dim][idx], self.n_cells[dim])
            counts[dim] = c
            supports[dim] = int(c.sum())
        return SetState(counts, supports)

    def remove(self, state: SetState, asn: int) -> None:
        for dim in self.binnings:
            code = self.code_of(dim, asn)
            if code >= 0:
                state.counts[dim][code] -= 1.0
                state.supports[dim] -= 1

    def add(self, state: SetState, asn: int) -> None:
        for dim in self.binnings:
            code = self.code_of(dim, asn)
            if code >= 0:
                state.counts[dim][code] += 1.0
                state.supports[dim] += 1

    def dim_score(self, dim: str, counts: np.ndarray, support: int) -> float | None:
        if support == 0:
            return None
        return metric_from_vectors(self.p_vecs[dim], counts / support, self.cfg)

    def dim_scores(self, state: SetState) -> dict[str, float | None]:
        """Per-dimension scores in schema order (inactive dimensions null)."""
        out: dict[str, float | None] = {}
        for dim in self.dim_names:
            if dim not in self.binnings:
                out[dim] = None
            else:
                out[dim] = self.dim_score(dim, state.counts[dim], state.supports[dim])
        return out

    def aggregate_of(self, scores: dict[str, float | None], agg: AggregationSpec) -> float:
        return aggregate_values(self.dim_names, [scores[d] for d in self.dim_names], agg)

    def score_members(self, members, agg: AggregationSpec) -> float:
        state = self.state_of(members)
        return self.aggregate_of(self.dim_scores(state), agg)

    # --- one-step what-if tables -------------------------------------
    # For a member occupying cell j of a dimension, the score after
    # removing (adding) one such member depends only on j, so a single
    # table of at most n_cells entries covers every candidate.

    def removal_table(self, dim: str, counts: np.ndarray, support: int) -> np.ndarray:
        cells = self.n_cells[dim]
        out = np.full(cells, np.nan)
        if support <= 1:
            return out  # removal empties the dimension: null score
        for j in range(cells):
            if counts[j] >= 1.0:
                q = counts.copy()
                q[j] -= 1.0
                out[j] = metric_from_vectors(self.p_vecs[dim], q / (support - 1), self.cfg)
        return out

    def addition_table(self, dim: str, counts: np.ndarray, support: int) -> np.ndarray:
        cells = self.n_cells[dim]
        out = np.empty(cells)
        for j in range(cells):
            q = counts.copy()
            q[j] += 1.0
            out[j] = metric_from_vectors(self.p_vecs[dim], q / (support + 1), self.cfg)
        return out
