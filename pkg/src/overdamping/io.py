"""CSV and JSON output with a provenance header, and a reader for both.

CSV files start with one comment line ``# {json}`` holding the provenance
record, followed by a header row and data rows. Floats are written with
``repr``, the shortest string that round-trips exactly.
"""
from __future__ import annotations

import datetime as _dt
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

from . import __version__

__all__ = ["Table", "provenance", "format_value", "write_csv", "read_csv", "dump_json", "read_json",
           "TEST_MODE_ENV"]

TEST_MODE_ENV = "OVERDAMPING_TEST_MODE"


@dataclass
class Table:
    header: dict
    columns: list[str]
    rows: list[list[Any]]

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _test_mode() -> bool:
    return os.environ.get(TEST_MODE_ENV, "") not in ("", "0")


def provenance(command: str, params: dict, seed: int | None = None,
               timestamp: bool | None = None) -> dict:
    """Parameters, seed and tool version; the timestamp is dropped in test mode."""
    if timestamp is None:
        timestamp = not _test_mode()
    rec = {"tool": "overdamping", "version": __version__, "command": command,
           "params": _jsonable(params), "seed": seed}
    if timestamp:
        rec["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return rec


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)      # "inf", "nan": JSON has no literal for these
    if hasattr(v, "value") and not isinstance(v, (int, float, str, bool)):
        return v.value      # enums
    return v


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(float(v))   # numpy scalars subclass float but repr differently
    if hasattr(v, "item"):
        return format_value(v.item())
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def _parse_value(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_csv(target: str | Path | TextIO, header: dict, columns: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        buf.write(",".join(format_value(v) for v in row) + "\n")
    _emit(target, buf.getvalue())


def read_csv(source: str | Path | TextIO) -> Table:
    text = _slurp(source)
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing provenance header line")
    header = json.loads(lines[0][2:])
    columns = lines[1].split(",") if len(lines) > 1 else []
    rows = [[_parse_value(f) for f in ln.split(",")] for ln in lines[2:] if ln]
    return Table(header, columns, rows)


def dump_json(target: str | Path | TextIO, header: dict, record: dict) -> None:
    text = json.dumps({"provenance": header, "result": _jsonable(record)}, sort_keys=True, indent=2)
    _emit(target, text + "\n")


def read_json(source: str | Path | TextIO) -> tuple[dict, dict]:
    doc = json.loads(_slurp(source))
    return doc["provenance"], doc["result"]


def _emit(target, text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


def _slurp(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text()
