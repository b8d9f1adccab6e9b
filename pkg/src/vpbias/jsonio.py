"""Versioned JSON document helpers shared by the CLI and the HTTP service.

Both surfaces emit the same document objects so that a CLI invocation and
the equivalent API request are identical after canonical normalization.
"""

from __future__ import annotations

import json

SCHEMA_VERSION = 1


def document(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def dumps_pretty(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def dumps_compact(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def canonical(obj) -> str:
    """Canonical form used to compare CLI and API outputs byte-for-byte."""
    return dumps_compact(obj)
