"""Read-only HTTP API over a loaded table and a directory of named VP sets.

Endpoints (all JSON):

    GET  /sets
    GET  /bias/{set}?metric=&w=&normalize=&agg=&dims=
    GET  /distributions/{set}/{dimension}
    POST /bias       {"asns": [...], "metric"?, "w"?, "normalize"?, "agg"?, "dims"?}
    POST /subsample  {"set"|"asns", "k", "algorithm"?, metric params}
    POST /extend     {"set"|"asns", "n", "algorithm"?, "exclude_stubs"?,
                      "candidates"?, metric params}

Responses for a request equal the output of the corresponding CLI
invocation on the same inputs. Errors are {"code", "message"} with
status 404 (unknown set/dimension), 400 (bad request), or 413 (set
exceeds the configured compute cap). The dataset is immutable after
startup; updating it is a restart, not an endpoint.
"""

from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from . import extension, sampling
from .data_model import FeatureTable, load_feature_table, load_schema, load_vantage_point_set
from .distributions import build_binning, empirical_distribution
from .errors import (
    EmptySampleError,
    EmptySetError,
    InvalidKError,
    InvalidNError,
    NoDataError,
    VpbiasError,
)
from .jsonio import document, dumps_compact
from .metrics import AGG_MODES, METRICS, AggregationSpec, BiasMetricConfig, bias_vector

DEFAULT_CAP = 2000


class ServiceState:
    """Immutable dataset plus a benign score cache."""

    def __init__(
        self,
        table: FeatureTable,
        named_sets: dict[str, frozenset[int]],
        population: frozenset[int] | None = None,
        cap: int = DEFAULT_CAP,
        missing_as_category: bool = False,
    ):
        self.table = table
        self.named_sets = dict(named_sets)
        self.population = population or frozenset(table.asns)
        self.cap = cap
        self.missing_as_category = missing_as_category
        self._cache: dict[tuple, dict] = {}
        self._lock = threading.Lock()

    def cached(self, key: tuple, compute):
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = compute()
        with self._lock:
            self._cache.setdefault(key, value)
        return value


def load_state(
    table_path,
    sets_dir,
    population_path=None,
    schema_path=None,
    cap: int = DEFAULT_CAP,
    missing_as_category: bool = False,
) -> ServiceState:
    """Load the table and every VP-set file (*.txt, *.csv) in a directory."""
    schema = load_schema(schema_path) if schema_path else None
    table = load_feature_table(table_path, schema)
    named = {}
    for path in sorted(Path(sets_dir).iterdir()):
        if path.suffix not in (".txt", ".csv") or not path.is_file():
            continue
        try:
            vps, unresolved = load_vantage_point_set(path, table)
        except VpbiasError as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            continue
        if unresolved:
            print(
                f"warning: {path}: {len(unresolved)} ASN(s) not in table",
                file=sys.stderr,
            )
        named[vps.name] = vps.members
    population = None
    if population_path:
        pop_set, _ = load_vantage_point_set(population_path, table)
        population = pop_set.members
    return ServiceState(
        table, named, population, cap=cap, missing_as_category=missing_as_category
    )


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _metric_params(params: dict) -> tuple[BiasMetricConfig, AggregationSpec]:
    metric = params.get("metric", "kl")
    if metric not in METRICS:
        raise ApiError(400, "bad-request", f"unknown metric {metric!r}")
    try:
        w = float(params.get("w", 0.01))
    except (TypeError, ValueError):
        raise ApiError(400, "bad-request", "w must be a number")
    normalize = params.get("normalize", True)
    if isinstance(normalize, str):
        if normalize.lower() not in ("true", "false"):
            raise ApiError(400, "bad-request", "normalize must be true or false")
        normalize = normalize.lower() == "true"
    agg_mode = params.get("agg", "mean")
    if agg_mode not in AGG_MODES or agg_mode == "weighted":
        allowed = [m for m in AGG_MODES if m != "weighted"]
        raise ApiError(400, "bad-request", f"agg must be one of {allowed}")
    dims = params.get("dims")
    if isinstance(dims, str):
        dims = [d.strip() for d in dims.split(",") if d.strip()]
    subset = tuple(dims) if dims else None
    if agg_mode == "subset" and not subset:
        raise ApiError(400, "bad-request", "agg=subset requires dims")
    try:
        cfg = BiasMetricConfig(metric=metric, smoothing_w=w, normalize=normalize)
        agg = AggregationSpec(mode=agg_mode, subset=subset)
    except ValueError as exc:
        raise ApiError(400, "bad-request", str(exc))
    return cfg, agg


def _resolve_set(state: ServiceState, body: dict) -> frozenset[int]:
    if "set" in body:
        name = body["set"]
        if name not in state.named_sets:
            raise ApiError(404, "not-found", f"unknown set {name!r}")
        return state.named_sets[name]
    if "asns" in body:
        return _resolve_asns(state, body["asns"])
    raise ApiError(400, "bad-request", "body needs 'set' or 'asns'")


def _resolve_asns(state: ServiceState, raw) -> frozenset[int]:
    if not isinstance(raw, list) or not all(
        isinstance(a, int) and not isinstance(a, bool) and a > 0 for a in raw
    ):
        raise ApiError(400, "bad-request", "asns must be a list of positive integers")
    members = frozenset(a for a in raw if a in state.table)
    if not members:
        raise ApiError(400, "empty-set", "no ASN resolves against the table")
    return members


def handle_request(
    state: ServiceState, method: str, path: str, query: dict, body: bytes | None
) -> tuple[int, dict]:
    """Route one request; returns (status, JSON-serializable object)."""
    try:
        return _route(state, method, path, query, body)
    except ApiError as exc:
        return exc.status, {"code": exc.code, "message": exc.message}
    except (EmptySetError, EmptySampleError) as exc:
        return 400, {"code": "empty-set", "message": str(exc)}
    except (InvalidKError, InvalidNError) as exc:
        return 400, {"code": "invalid-size", "message": str(exc)}
    except NoDataError as exc:
        return 404, {"code": "no-data", "message": str(exc)}
    except (VpbiasError, ValueError) as exc:
        return 400, {"code": "bad-request", "message": str(exc)}


def _route(state, method, path, query, body):
    parts = [p for p in path.split("/") if p]
    params = {k: v[0] if isinstance(v, list) else v for k, v in query.items()}

    if method == "GET":
        if parts == ["sets"]:
            return 200, document(
                {
                    "sets": [
                        {"name": n, "size": len(state.named_sets[n])}
                        for n in sorted(state.named_sets)
                    ]
                }
            )
        if len(parts) == 2 and parts[0] == "bias":
            name = parts[1]
            if name not in state.named_sets:
                raise ApiError(404, "not-found", f"unknown set {name!r}")
            cfg, agg = _metric_params(params)
            key = (name, cfg, agg)
            return 200, state.cached(
                key,
                lambda: document(
                    bias_vector(
                        state.table, state.population, state.named_sets[name],
                        cfg, agg, missing_as_category=state.missing_as_category,
                    ).to_json_obj()
                ),
            )
        if len(parts) == 3 and parts[0] == "distributions":
            _, name, dim = parts
            if name not in state.named_sets:
                raise ApiError(404, "not-found", f"unknown set {name!r}")
            if dim not in state.table.dimension_names():
                raise ApiError(404, "not-found", f"unknown dimension {dim!r}")
            binning = build_binning(
                state.table, state.population, dim, state.missing_as_category
            )
            dist = empirical_distribution(state.table, state.named_sets[name], binning)
            return 200, document(dist.to_json_obj())
        raise ApiError(404, "not-found", f"no route for GET /{'/'.join(parts)}")

    if method == "POST":
        try:
            payload = json.loads(body or b"")
        except json.JSONDecodeError:
            raise ApiError(400, "bad-request", "body is not valid JSON")
        if not isinstance(payload, dict):
            raise ApiError(400, "bad-request", "body must be a JSON object")

        if parts == ["bias"]:
            if "asns" not in payload:
                raise ApiError(400, "bad-request", "body needs 'asns'")
            members = _resolve_asns(state, payload["asns"])
            cfg, agg = _metric_params(payload)
            report = bias_vector(
                state.table, state.population, members, cfg, agg,
                missing_as_category=state.missing_as_category,
            )
            return 200, document(report.to_json_obj())

        if parts == ["subsample"]:
            vps = _resolve_set(state, payload)
            if len(vps) > state.cap:
                raise ApiError(
                    413, "set-too-large",
                    f"set of {len(vps)} exceeds the cap of {state.cap}",
                )
            cfg, agg = _metric_params(payload)
            algorithm = payload.get("algorithm", "greedy")
            if algorithm not in ("greedy", "sorting"):
                raise ApiError(400, "bad-request", "algorithm must be greedy or sorting")
            try:
                k = int(payload["k"])
            except (KeyError, TypeError, ValueError):
                raise ApiError(400, "bad-request", "body needs integer 'k'")
            run = (
                sampling.greedy_subsample if algorithm == "greedy"
                else sampling.sorting_subsample
            )
            result = run(
                state.table, state.population, vps, k, cfg, agg,
                missing_as_category=state.missing_as_category,
            )
            return 200, document(result.to_json_obj())

        if parts == ["extend"]:
            vps = _resolve_set(state, payload)
            if len(vps) > state.cap:
                raise ApiError(
                    413, "set-too-large",
                    f"set of {len(vps)} exceeds the cap of {state.cap}",
                )
            cfg, agg = _metric_params(payload)
            algorithm = payload.get("algorithm", "sorting")
            if algorithm not in ("greedy", "sorting"):
                raise ApiError(400, "bad-request", "algorithm must be greedy or sorting")
            try:
                n = int(payload["n"])
            except (KeyError, TypeError, ValueError):
                raise ApiError(400, "bad-request", "body needs integer 'n'")
            if "candidates" in payload:
                candidates = _resolve_asns(state, payload["candidates"]) - vps
            else:
                candidates = frozenset(state.population - vps)
            run = (
                extension.greedy_extend if algorithm == "greedy"
                else extension.sorting_extend
            )
            result = run(
                state.table, state.population, vps, candidates, n, cfg, agg,
                exclude_stubs=bool(payload.get("exclude_stubs", False)),
                stub_dimension=payload.get(
                    "stub_dimension", extension.DEFAULT_STUB_DIMENSION
                ),
                missing_as_category=state.missing_as_category,
            )
            return 200, document(result.to_json_obj())

        raise ApiError(404, "not-found", f"no route for POST /{'/'.join(parts)}")

    raise ApiError(400, "bad-request", f"unsupported method {method}")


def make_server(state: ServiceState, host: str, port: int) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def _respond(self):
            url = urlsplit(self.path)
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else None
            status, obj = handle_request(
                state, self.command, url.path, parse_qs(url.query), body
            )
            data = dumps_compact(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        do_GET = _respond
        do_POST = _respond

        def log_message(self, fmt, *fmt_args):
            print(f"{self.address_string()} {fmt % fmt_args}", file=sys.stderr)

    return ThreadingHTTPServer((host, port), Handler)


def serve(state: ServiceState, host: str = "127.0.0.1", port: int = 8080) -> None:
    server = make_server(state, host, port)
    print(f"serving on http://{host}:{server.server_address[1]}/", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
