"""Report envelopes and their on-disk form.

JSON is written by a small serializer rather than :mod:`json` so that every
float carries 17 significant digits (enough to round-trip a double exactly)
and output bytes depend only on the data.  Non-finite floats become the
strings "nan", "inf" and "-inf".  Run metadata that varies between runs
(timestamp, argv, library versions) goes to a separate sidecar file.
"""
from __future__ import annotations

import datetime as _dt
import json
import math
import os
import platform
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "torusop-report/1"
STATUSES = ("pass", "fail", "inconclusive", "finding")
EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2, "finding": 2}


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _plain(obj):
    """Convert records and numpy values to dict/list/str/int/float/bool/None."""
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    out: list[str] = []

    def emit(v, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, dict):
            if not v:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, x) in enumerate(v.items()):
                out.append(f"{pad}{json.dumps(k)}: ")
                emit(x, level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(v, list):
            if not v:
                out.append("[]")
                return
            if all(not isinstance(x, (dict, list)) for x in v):
                out.append("[")
                for i, x in enumerate(v):
                    emit(x, level + 1)
                    if i < len(v) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for i, x in enumerate(v):
                out.append(pad)
                emit(x, level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "]")
        elif isinstance(v, bool):
            out.append("true" if v else "false")
        elif v is None:
            out.append("null")
        elif isinstance(v, int):
            out.append(str(v))
        elif isinstance(v, float):
            out.append(_float(v))
        else:
            out.append(json.dumps(v))

    emit(_plain(obj), 0)
    out.append("\n")
    return "".join(out)


def loads(text: str):
    """Inverse of :func:`dumps` (non-finite markers stay strings)."""
    return json.loads(text)


@dataclass
class Envelope:
    command: str
    config: dict
    seed: int
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    status: str = "pass"
    version: str = ""

    def to_dict(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        return {"schema": SCHEMA, "artifact_version": self.version, "command": self.command,
                "seed": self.seed, "config": self.config, "records": self.records,
                "summary": self.summary, "status": self.status}

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


def combine_status(statuses) -> str:
    """fail beats finding beats inconclusive beats pass."""
    s = set(statuses)
    for level in ("fail", "finding", "inconclusive"):
        if level in s:
            return level
    return "pass"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar(argv) -> dict:
    return {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), "argv": list(argv),
            "python": platform.python_version(), "numpy": np.__version__,
            "platform": sys.platform}


def csv_text(header, rows) -> str:
    """Comma-separated text; floats with 17 significant digits."""
    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        if isinstance(v, (tuple, list)):
            return " ".join(str(x) for x in v)
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
