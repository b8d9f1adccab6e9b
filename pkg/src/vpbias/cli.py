"""Command-line interface.

Subcommands: bias, ks, subsample, extend, baseline, complexity,
correlate, eval-latency, synth, serve. Machine-readable output goes to
stdout (or --out); diagnostics and warnings go to stderr only. Exit
codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

from . import analytics, complexity, extension, sampling, synth
from .data_model import (
    FeatureTable,
    load_feature_table,
    load_schema,
    load_vantage_point_set,
    parse_asn_list,
)
from .errors import VpbiasError
from .jsonio import document, dumps_pretty
from .metrics import (
    AGG_MODES,
    METRICS,
    AggregationSpec,
    BiasMetricConfig,
    bias_vector,
    ks_vector,
)
from .distributions import build_binning, empirical_distribution


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def _table_opts() -> Parser:
    p = Parser(add_help=False)
    p.add_argument("--table", required=True, help="feature table CSV")
    p.add_argument("--schema", help="dimension schema CSV (default: inferred)")
    p.add_argument(
        "--population", help="VP-set file restricting the population (default: whole table)"
    )
    p.add_argument(
        "--missing-as-category", action="store_true",
        help="count missing values in a dedicated cell instead of excluding them",
    )
    return p


def _metric_opts() -> Parser:
    p = Parser(add_help=False)
    p.add_argument("--metric", choices=METRICS, default="kl")
    p.add_argument("--w", type=float, default=0.01, help="KL smoothing weight")
    p.add_argument("--no-normalize", action="store_true", help="report unnormalized KL")
    p.add_argument("--agg", choices=AGG_MODES, default="mean")
    p.add_argument("--weights", help="JSON file {dimension: weight} for --agg weighted")
    p.add_argument("--dims", help="comma list of dimensions for --agg subset")
    return p


def _out_opts(default_format: str = "json") -> Parser:
    p = Parser(add_help=False)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument(
        "--threads", type=int, default=1,
        help="cap on worker threads (evaluation currently runs single-threaded)",
    )
    return p


def build_parser() -> Parser:
    parser = Parser(prog="vpbias", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bias", parents=[_table_opts(), _metric_opts(), _out_opts()],
                       help="per-dimension bias report for a sample")
    p.add_argument("--sample", required=True, help="VP-set file")
    p.add_argument("--sample2", help="second VP-set file for side-by-side reports")
    p.add_argument("--radar", help="write fixed-order {dimension, score} array to this JSON file")
    p.add_argument("--distribution", metavar="DIM",
                   help="emit the sample's distribution of one dimension instead of the report")
    p.set_defaults(func=cmd_bias)

    p = sub.add_parser("ks", parents=[_table_opts(), _out_opts()],
                       help="per-dimension two-sample KS test")
    p.add_argument("--sample", required=True)
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("subsample", parents=[_table_opts(), _metric_opts(), _out_opts()],
                       help="select a bias-minimizing subset of a VP set")
    p.add_argument("--sample", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algorithm", choices=("greedy", "sorting"), default="greedy")
    p.add_argument("--early-exit", action="store_true",
                   help="greedy only: stop once no removal decreases bias")
    p.add_argument("--trajectory-csv", help="also write size,bias rows to this file")
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("extend", parents=[_table_opts(), _metric_opts(), _out_opts("csv")],
                       help="rank candidate additions, or extend by n of them")
    p.add_argument("--sample", required=True)
    p.add_argument("--candidates", help="candidate ASN file (default: population minus sample)")
    p.add_argument("--n", type=int, help="number of additions (omit to emit the full ranking)")
    p.add_argument("--algorithm", choices=("greedy", "sorting"), default="sorting")
    p.add_argument("--exclude-stubs", action="store_true")
    p.add_argument("--stub-dimension", default=extension.DEFAULT_STUB_DIMENSION)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("baseline", parents=[_table_opts(), _metric_opts(), _out_opts()],
                       help="seeded random-sampling bias baseline")
    p.add_argument("--sample", help="source VP-set file (default: the population)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("complexity", parents=[_out_opts("csv")],
                       help="acquisition-complexity scores from labels")
    p.add_argument("--labels", required=True, help="CSV with columns asn,label")
    p.add_argument("--score-table", help="per-label score CSV (default: shipped table)")
    p.add_argument("--stat", choices=complexity.STATS, default="mean")
    p.add_argument("--collapse", choices=complexity.CROSS_MODES, default="merge")
    p.add_argument("--neutral-unknown", action="store_true",
                   help="score unknown labels as neutral (0) instead of failing")
    p.add_argument("--ecdf", help="write the score ECDF to this JSON file")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("correlate", parents=[_table_opts(), _out_opts()],
                       help="pairwise association matrix of all dimensions")
    p.add_argument("--csv-matrix", help="write the dimension matrix as CSV here")
    p.add_argument("--csv-categories", help="write the category matrix as CSV here")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("eval-latency", parents=[_out_opts("csv")],
                       help="percentile relative error of a latency estimate")
    p.add_argument("--ground-truth", required=True, help="CSV asn,latency_ms over all ASes")
    p.add_argument("--members", required=True, help="ASN file of the measuring subset")
    p.add_argument("--estimate",
                   help="CSV asn,latency_ms of measured values (default: ground truth)")
    p.add_argument("--percentiles", help="comma list in 1..99 (default: 1..99)")
    p.set_defaults(func=cmd_eval_latency)

    p = sub.add_parser("synth", parents=[_out_opts()],
                       help="generate a synthetic table and VP sets from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-table", required=True)
    p.add_argument("--out-dir", help="directory for VP-set files (one per strategy)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", parents=[_table_opts()],
                       help="read-only HTTP API over a table and named VP sets")
    p.add_argument("--sets-dir", required=True, help="directory of VP-set files")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cap", type=int, default=2000,
                   help="reject subsample/extend requests on sets larger than this")
    p.set_defaults(func=cmd_serve)

    return parser


# --- shared argument handling ---

def _load_table(args) -> FeatureTable:
    schema = load_schema(args.schema) if args.schema else None
    return load_feature_table(args.table, schema)


def _load_set(path: str, table: FeatureTable) -> frozenset[int]:
    vps, unresolved = load_vantage_point_set(path, table)
    if unresolved:
        print(
            f"warning: {len(unresolved)} ASN(s) in {path} not in the table: "
            f"{unresolved[:10]}{'...' if len(unresolved) > 10 else ''}",
            file=sys.stderr,
        )
    return vps.members


def _population(args, table: FeatureTable) -> frozenset[int]:
    if args.population:
        return _load_set(args.population, table)
    return frozenset(table.asns)


def _metric_cfg(args) -> BiasMetricConfig:
    return BiasMetricConfig(
        metric=args.metric, smoothing_w=args.w, normalize=not args.no_normalize
    )


def _agg_spec(args) -> AggregationSpec:
    weights = None
    subset = None
    if args.agg == "weighted":
        if not args.weights:
            raise UsageError("--agg weighted requires --weights")
        weights = {
            str(k): float(v)
            for k, v in json.loads(Path(args.weights).read_text(encoding="utf-8")).items()
        }
    if args.agg == "subset":
        if not args.dims:
            raise UsageError("--agg subset requires --dims")
        subset = tuple(d.strip() for d in args.dims.split(",") if d.strip())
    return AggregationSpec(mode=args.agg, weights=weights, subset=subset)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict) -> None:
    _emit(args, dumps_pretty(document(payload)))


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# --- subcommands ---

def cmd_bias(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    sample = _load_set(args.sample, table)
    cfg = _metric_cfg(args)
    agg = _agg_spec(args)

    if args.distribution:
        if args.distribution not in table.dimension_names():
            raise UsageError(f"unknown dimension {args.distribution!r}")
        binning = build_binning(
            table, population, args.distribution, args.missing_as_category
        )
        dist = empirical_distribution(table, sample, binning)
        _emit_json(args, dist.to_json_obj())
        return 0

    report = bias_vector(
        table, population, sample, cfg, agg,
        missing_as_category=args.missing_as_category,
    )
    if args.radar:
        Path(args.radar).write_text(
            dumps_pretty(document({"radar": report.radar_rows()})), encoding="utf-8"
        )
    if args.sample2:
        report2 = bias_vector(
            table, population, _load_set(args.sample2, table), cfg, agg,
            missing_as_category=args.missing_as_category,
        )
        _emit_json(args, {"sample": report.to_json_obj(), "sample2": report2.to_json_obj()})
        return 0
    if args.format == "csv":
        rows = [("dimension", "score")]
        rows += [(d, "" if s is None else s) for d, s in report.per_dimension.items()]
        rows.append(("(aggregate)", report.aggregate))
        _emit(args, _csv_text(rows))
        return 0
    _emit_json(args, report.to_json_obj())
    return 0


def cmd_ks(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    sample = _load_set(args.sample, table)
    results = ks_vector(table, population, sample, args.missing_as_category)
    if args.format == "csv":
        rows = [("dimension", "statistic", "p_value", "reject_at_5pct")]
        for dim, r in results.items():
            rows.append(
                (dim, "", "", "") if r is None
                else (dim, r.statistic, r.p_value, r.reject_at_5pct)
            )
        _emit(args, _csv_text(rows))
        return 0
    payload = {
        "per_dimension": {
            dim: (None if r is None else r.to_json_obj()) for dim, r in results.items()
        }
    }
    _emit_json(args, payload)
    return 0


def cmd_subsample(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    vps = _load_set(args.sample, table)
    cfg = _metric_cfg(args)
    agg = _agg_spec(args)
    if args.algorithm == "greedy":
        result = sampling.greedy_subsample(
            table, population, vps, args.k, cfg, agg,
            early_exit=args.early_exit,
            missing_as_category=args.missing_as_category,
        )
    else:
        result = sampling.sorting_subsample(
            table, population, vps, args.k, cfg, agg,
            missing_as_category=args.missing_as_category,
        )
    if args.trajectory_csv:
        rows = [("size", "bias")] + [(s, b) for s, b in result.trajectory]
        Path(args.trajectory_csv).write_text(_csv_text(rows), encoding="utf-8")
    _emit_json(args, result.to_json_obj())
    return 0


def _candidate_set(args, table, population, vps) -> frozenset[int]:
    if args.candidates:
        return _load_set(args.candidates, table)
    return frozenset(population - vps)


def cmd_extend(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    vps = _load_set(args.sample, table)
    cfg = _metric_cfg(args)
    agg = _agg_spec(args)
    candidates = _candidate_set(args, table, population, vps)

    if args.n is None:
        ranked = extension.score_candidates(
            table, population, vps, candidates, cfg, agg,
            exclude_stubs=args.exclude_stubs,
            stub_dimension=args.stub_dimension,
            missing_as_category=args.missing_as_category,
        )
        if args.format == "json":
            _emit_json(args, {"candidates": [c.to_json_obj() for c in ranked]})
            return 0
        rows = [("asn", "bias_delta", "relative_delta_pct")]
        rows += [
            (c.asn, c.bias_delta,
             "" if c.relative_delta_pct is None else c.relative_delta_pct)
            for c in ranked
        ]
        _emit(args, _csv_text(rows))
        return 0

    run = extension.greedy_extend if args.algorithm == "greedy" else extension.sorting_extend
    result = run(
        table, population, vps, candidates, args.n, cfg, agg,
        exclude_stubs=args.exclude_stubs,
        stub_dimension=args.stub_dimension,
        missing_as_category=args.missing_as_category,
    )
    _emit_json(args, result.to_json_obj())
    return 0


def cmd_baseline(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    source = _load_set(args.sample, table) if args.sample else population
    result = sampling.random_baseline(
        table, population, source, args.k,
        iterations=args.iterations, seed=args.seed,
        cfg=_metric_cfg(args), agg=_agg_spec(args),
        missing_as_category=args.missing_as_category,
    )
    _emit_json(args, result.to_json_obj())
    return 0


def cmd_complexity(args) -> int:
    from .data_model import load_labels

    score_table = (
        complexity.ComplexityScoreTable.from_csv(args.score_table)
        if args.score_table else complexity.default_score_table()
    )
    assignments = load_labels(
        args.labels, None if args.neutral_unknown else score_table
    )
    policy = complexity.CollapsePolicy(args.stat, args.collapse)
    scores = complexity.score_all(
        assignments, score_table, policy, neutral_unknown=args.neutral_unknown
    )
    if args.ecdf:
        points = complexity.ecdf_points([s.normalized for s in scores])
        Path(args.ecdf).write_text(
            dumps_pretty(document({"ecdf": [[v, f] for v, f in points]})),
            encoding="utf-8",
        )
    if args.format == "json":
        _emit_json(args, {"scores": [s.to_json_obj() for s in scores]})
        return 0
    rows = [("asn", "raw", "normalized")]
    rows += [(s.asn, s.raw, s.normalized) for s in scores]
    _emit(args, _csv_text(rows))
    return 0


def cmd_correlate(args) -> int:
    table = _load_table(args)
    population = _population(args, table)
    result = analytics.correlation_matrix(table, population)
    if args.csv_matrix:
        rows = [("",) + result.dimensions]
        for dim, line in zip(result.dimensions, result.matrix):
            rows.append((dim,) + tuple("" if v is None else v for v in line))
        Path(args.csv_matrix).write_text(_csv_text(rows), encoding="utf-8")
    if args.csv_categories:
        rows = [("",) + result.categories]
        for cat, line in zip(result.categories, result.category_matrix):
            rows.append((cat,) + tuple("" if v is None else v for v in line))
        Path(args.csv_categories).write_text(_csv_text(rows), encoding="utf-8")
    _emit_json(args, result.to_json_obj())
    return 0


def cmd_eval_latency(args) -> int:
    ground_truth = analytics.load_latency_csv(args.ground_truth)
    estimate = (
        analytics.load_latency_csv(args.estimate) if args.estimate else ground_truth
    )
    members = frozenset(parse_asn_list(args.members))
    percentiles = None
    if args.percentiles:
        percentiles = [int(p) for p in args.percentiles.split(",") if p.strip()]
    result = analytics.percentile_relative_error(
        ground_truth, members, estimate, percentiles
    )
    if args.format == "csv":
        rows = [("percentile", "relative_error")]
        rows += [
            (p, "" if e is None else e) for p, e in result.per_percentile.items()
        ]
        rows.append(("mean", result.mean_error))
        _emit(args, _csv_text(rows))
        return 0
    _emit_json(args, result.to_json_obj())
    return 0


def cmd_synth(args) -> int:
    spec = synth.SynthSpec.from_file(args.spec)
    table, vp_sets = synth.generate(spec)
    table.to_csv(args.out_table)
    written = {}
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for vps in vp_sets:
            path = out_dir / f"{vps.name}.txt"
            path.write_text(
                "".join(f"{a}\n" for a in sorted(vps.members)), encoding="utf-8"
            )
            written[vps.name] = len(vps.members)
    _emit_json(args, {"table": args.out_table, "rows": len(table), "sets": written})
    return 0


def cmd_serve(args) -> int:
    from .service import load_state, serve

    state = load_state(
        args.table, args.sets_dir,
        population_path=args.population,
        schema_path=args.schema,
        cap=args.cap,
        missing_as_category=args.missing_as_category,
    )
    serve(state, args.host, args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        with warnings.catch_warnings():
            warnings.simplefilter("always")

            def to_stderr(message, category, filename, lineno, file=None, line=None):
                print(f"warning: {message}", file=sys.stderr)

            warnings.showwarning = to_stderr
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except VpbiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
