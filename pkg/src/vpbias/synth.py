"""Seeded synthetic populations and vantage-point sets.

Used for fixtures and desk-scale experiments standing in for real AS
snapshots. Heavy-tailed numerical generators (lognormal, Pareto) are
included on purpose: realistic size/topology characteristics are skewed
and stress quantile binning.

Spec file (JSON):

    {
      "n_ases": 1000,
      "seed": 7,
      "dimensions": [
        {"name": "region", "kind": "categorical", "category": "Location",
         "generator": "uniform-categorical", "k": 5},
        {"name": "kind", "kind": "categorical",
         "generator": "zipf-categorical", "k": 6, "s": 1.2},
        {"name": "cone", "kind": "numerical",
         "generator": "lognormal", "mu": 1.0, "sigma": 1.5},
        {"name": "degree", "kind": "numerical",
         "generator": "pareto", "alpha": 1.3}
      ],
      "vp_strategies": [
        {"name": "random50", "rule": "uniform-random", "k": 50},
        {"name": "skewed", "rule": "category-skew", "k": 50,
         "dimension": "region", "category": "c01", "fraction": 0.9}
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_model import (
    CATEGORICAL,
    CATEGORY_GROUPS,
    FALLBACK_CATEGORY,
    NUMERICAL,
    DimensionSchema,
    FeatureTable,
    VantagePointSet,
)
from .errors import InvalidSpecError

GEN_UNIFORM_CAT = "uniform-categorical"
GEN_ZIPF_CAT = "zipf-categorical"
GEN_LOGNORMAL = "lognormal"
GEN_PARETO = "pareto"

RULE_UNIFORM = "uniform-random"
RULE_SKEW = "category-skew"


@dataclass(frozen=True)
class DimensionGen:
    name: str
    kind: str
    generator: str
    params: tuple[tuple[str, float], ...]
    category: str = FALLBACK_CATEGORY

    def param(self, key: str) -> float:
        return dict(self.params)[key]


@dataclass(frozen=True)
class VpStrategy:
    name: str
    rule: str
    k: int
    dimension: str | None = None
    category: str | None = None
    fraction: float | None = None


@dataclass(frozen=True)
class SynthSpec:
    n_ases: int
    seed: int
    dimensions: tuple[DimensionGen, ...]
    vp_strategies: tuple[VpStrategy, ...] = ()

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SynthSpec":
        dims = []
        for d in obj.get("dimensions", []):
            reserved = {"name", "kind", "generator", "category"}
            params = tuple(
                sorted((k, float(v)) for k, v in d.items() if k not in reserved)
            )
            dims.append(
                DimensionGen(
                    name=d["name"],
                    kind=d["kind"],
                    generator=d["generator"],
                    params=params,
                    category=d.get("category", FALLBACK_CATEGORY),
                )
            )
        strategies = []
        for s in obj.get("vp_strategies", []):
            strategies.append(
                VpStrategy(
                    name=s["name"],
                    rule=s["rule"],
                    k=int(s["k"]),
                    dimension=s.get("dimension"),
                    category=s.get("category"),
                    fraction=float(s["fraction"]) if "fraction" in s else None,
                )
            )
        return cls(
            n_ases=int(obj["n_ases"]),
            seed=int(obj.get("seed", 0)),
            dimensions=tuple(dims),
            vp_strategies=tuple(strategies),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SynthSpec":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, KeyError) as exc:
            raise InvalidSpecError(f"{path}: {exc}")
        try:
            return cls.from_json_obj(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"{path}: {exc}")


def _validate(spec: SynthSpec) -> None:
    if spec.n_ases < 1:
        raise InvalidSpecError("n_ases must be >= 1")
    names = [d.name for d in spec.dimensions]
    if not names:
        raise InvalidSpecError("at least one dimension is required")
    if len(set(names)) != len(names):
        raise InvalidSpecError("duplicate dimension names")
    for d in spec.dimensions:
        params = dict(d.params)
        if d.category not in CATEGORY_GROUPS:
            raise InvalidSpecError(f"{d.name}: unknown category {d.category!r}")
        if d.generator in (GEN_UNIFORM_CAT, GEN_ZIPF_CAT):
            if d.kind != CATEGORICAL:
                raise InvalidSpecError(f"{d.name}: {d.generator} needs kind categorical")
            if int(params.get("k", 0)) < 1:
                raise InvalidSpecError(f"{d.name}: needs k >= 1")
            if d.generator == GEN_ZIPF_CAT and params.get("s", 0.0) <= 0:
                raise InvalidSpecError(f"{d.name}: zipf needs s > 0")
        elif d.generator == GEN_LOGNORMAL:
            if d.kind != NUMERICAL:
                raise InvalidSpecError(f"{d.name}: lognormal needs kind numerical")
            if params.get("sigma", -1.0) < 0:
                raise InvalidSpecError(f"{d.name}: lognormal needs sigma >= 0")
        elif d.generator == GEN_PARETO:
            if d.kind != NUMERICAL:
                raise InvalidSpecError(f"{d.name}: pareto needs kind numerical")
            if params.get("alpha", 0.0) <= 0:
                raise InvalidSpecError(f"{d.name}: pareto needs alpha > 0")
        else:
            raise InvalidSpecError(f"{d.name}: unknown generator {d.generator!r}")
    for s in spec.vp_strategies:
        if not 1 <= s.k <= spec.n_ases:
            raise InvalidSpecError(f"{s.name}: k must be in 1..n_ases")
        if s.rule == RULE_SKEW:
            if s.dimension not in names:
                raise InvalidSpecError(f"{s.name}: unknown dimension {s.dimension!r}")
            if s.category is None or s.fraction is None or not 0 <= s.fraction <= 1:
                raise InvalidSpecError(f"{s.name}: needs category and fraction in [0,1]")
        elif s.rule != RULE_UNIFORM:
            raise InvalidSpecError(f"{s.name}: unknown rule {s.rule!r}")


def category_tokens(k: int) -> list[str]:
    return [f"c{i:02d}" for i in range(k)]


def generate(spec: SynthSpec) -> tuple[FeatureTable, list[VantagePointSet]]:
    """Deterministically generate a feature table and its VP sets."""
    _validate(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.n_ases
    asns = list(range(1, n + 1))

    columns = {}
    schema = []
    for d in spec.dimensions:
        params = dict(d.params)
        if d.generator == GEN_UNIFORM_CAT:
            tokens = category_tokens(int(params["k"]))
            values = [tokens[i] for i in rng.integers(0, len(tokens), size=n)]
        elif d.generator == GEN_ZIPF_CAT:
            tokens = category_tokens(int(params["k"]))
            weights = 1.0 / np.arange(1, len(tokens) + 1) ** params["s"]
            weights /= weights.sum()
            values = [tokens[i] for i in rng.choice(len(tokens), size=n, p=weights)]
        elif d.generator == GEN_LOGNORMAL:
            values = rng.lognormal(params["mu"], params["sigma"], size=n).tolist()
        else:
            values = (rng.pareto(params["alpha"], size=n) + 1.0).tolist()
        columns[d.name] = values
        schema.append(
            DimensionSchema(name=d.name, kind=d.kind, category=d.category)
        )

    rows = {
        asn: [columns[d.name][i] for d in spec.dimensions]
        for i, asn in enumerate(asns)
    }
    table = FeatureTable(schema, rows)

    vp_sets = []
    asn_array = np.asarray(asns, dtype=np.int64)
    for s in spec.vp_strategies:
        if s.rule == RULE_UNIFORM:
            chosen = asn_array[rng.choice(n, size=s.k, replace=False)]
        else:
            in_cat = np.asarray(
                [a for i, a in enumerate(asns) if columns[s.dimension][i] == s.category],
                dtype=np.int64,
            )
            n_skew = int(round(s.fraction * s.k))
            if n_skew > len(in_cat):
                raise InvalidSpecError(
                    f"{s.name}: category {s.category!r} has only {len(in_cat)} "
                    f"members, needs {n_skew}"
                )
            skewed = in_cat[rng.choice(len(in_cat), size=n_skew, replace=False)]
            rest_pool = np.asarray(sorted(set(asns) - set(skewed.tolist())), dtype=np.int64)
            rest = rest_pool[rng.choice(len(rest_pool), size=s.k - n_skew, replace=False)]
            chosen = np.concatenate([skewed, rest])
        vp_sets.append(
            VantagePointSet(name=s.name, members=frozenset(int(a) for a in chosen))
        )
    return table, vp_sets
