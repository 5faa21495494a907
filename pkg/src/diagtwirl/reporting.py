"""Deterministic machine-readable reports for the command-line front end.

Reports carry the full configuration echo, the library version and a numeric
deviation for every check, never a bare pass/fail.  Formatting is fixed so
that identical configurations produce byte-identical files: CSV floats are
printed with 17 significant digits and JSON objects are emitted with sorted
keys; nothing time- or host-dependent is embedded.
"""

from __future__ import annotations

import json
import sys
from typing import Any, Mapping, Sequence

__all__ = [
    "REPORT_SCHEMA",
    "format_float",
    "format_value",
    "render_csv",
    "render_json",
    "write_text",
]

# JSON report layout (kept in sync with README.md).
REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "diagtwirl report",
    "type": "object",
    "required": ["config", "results", "deviations"],
    "additionalProperties": False,
    "properties": {
        "config": {
            "type": "object",
            "description": "echo of the parsed run configuration, plus the library version",
            "required": ["command", "version"],
            "properties": {
                "command": {"type": "string"},
                "version": {"type": "string"},
            },
        },
        "results": {
            "type": "array",
            "description": "one object per check or table row",
            "items": {"type": "object"},
        },
        "deviations": {
            "type": "object",
            "description": "largest numeric deviation observed per named check",
            "additionalProperties": {"type": "number"},
        },
    },
}


def format_float(x: float) -> str:
    """Fixed 17-significant-digit decimal rendering, locale independent."""
    return format(float(x), ".17g")


def format_value(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format_float(x)
    return str(x)


def render_csv(
    config: Mapping[str, Any], header: Sequence[str], rows: Sequence[Mapping[str, Any]]
) -> str:
    """Comment-prefixed config echo followed by a plain CSV table."""
    lines = [f"# {key}={format_value(config[key])}" for key in sorted(config)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(row[col]) for col in header))
    return "\n".join(lines) + "\n"


def render_json(
    config: Mapping[str, Any],
    results: Sequence[Mapping[str, Any]],
    deviations: Mapping[str, float],
) -> str:
    report = {
        "config": dict(config),
        "results": [dict(r) for r in results],
        "deviations": {k: float(v) for k, v in deviations.items()},
    }
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_text(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
