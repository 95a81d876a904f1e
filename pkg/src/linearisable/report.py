"""Canonical report envelope and byte-stable serialisation."""
from __future__ import annotations

import json
import math

from .runners import to_builtin

SCHEMA_VERSION = "1"


def _clean(obj):
    # JSON has no inf/nan; the point at infinity is already "inf" in exact payloads
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def build_report(subcommand: str, config: dict, payload: dict) -> dict:
    from . import __version__

    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "subcommand": subcommand,
        "config": _clean(to_builtin(config)),
        "payload": _clean(to_builtin(payload)),
    }


def emit_json(report: dict) -> bytes:
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False)
    return (text + "\n").encode("utf-8")
