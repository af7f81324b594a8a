"""Serialization for networks, traces, and reports.

Edge lists are tab-separated ``row<TAB>col`` lines, zero-indexed, sorted by
(row, col).  Traces serialize to JSON with one object per sweep level.  All
writers produce byte-identical output for identical inputs.
"""

from __future__ import annotations

import json
from typing import Any, TextIO

from .samplers import SampledNetwork, SampleTrace


def edgelist_lines(net: SampledNetwork):
    """Yield one ``row\\tcol\\n`` line per edge, in stored (sorted) order."""
    for row, col in net.edges:
        yield f"{int(row)}\t{int(col)}\n"


def write_edgelist(net: SampledNetwork, stream: TextIO) -> None:
    stream.writelines(edgelist_lines(net))


def save_edgelist(net: SampledNetwork, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_edgelist(net, handle)


def trace_to_dict(trace: SampleTrace) -> dict[str, Any]:
    """JSON-ready view of a trace; levels keyed as ``lambda`` 0..K-ell."""
    return {
        "seed": trace.seed,
        "strategy": trace.strategy.value,
        "per_level": [
            {
                "lambda": entry.level,
                "examined": entry.rvs_examined,
                "active": entry.rvs_active,
            }
            for entry in trace.per_level
        ],
    }


def dump_json(payload: Any, stream: TextIO) -> None:
    """Write compact deterministic JSON with a trailing newline."""
    json.dump(payload, stream, indent=2, sort_keys=True)
    stream.write("\n")


def save_json(payload: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        dump_json(payload, handle)


def format_table(headers: list[str], rows: list[list[Any]]) -> str:
    """Render a left-aligned plain-text table."""
    cells = [[str(value) for value in row] for row in rows]
    widths = [len(name) for name in headers]
    for row in cells:
        for idx, value in enumerate(row):
            widths[idx] = max(widths[idx], len(value))
    def fmt(row: list[str]) -> str:
        return "  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * width for width in widths])]
    lines.extend(fmt(row) for row in cells)
    return "\n".join(lines) + "\n"
