"""Output files: atomic writes, provenance headers, CSV and JSON shapes."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__

# resolved-config keys that do not affect results
UNHASHED_KEYS = frozenset({"output", "threads", "config"})


def plain(obj):
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def public_config(config: dict) -> dict:
    """The part of a resolved configuration that determines results."""
    return {k: v for k, v in config.items() if k not in UNHASHED_KEYS and not k.startswith("_")}


def config_hash(config: dict) -> str:
    body = public_config(config)
    text = json.dumps(plain(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def provenance(config: dict) -> dict:
    return {"tool": "macrokin", "version": __version__, "config_sha256": config_hash(config)}


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path``, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], prov: dict | None = None,
             note: str | None = None) -> str:
    """CSV with optional ``#`` comment lines for provenance and a note."""
    buf = io.StringIO()
    if prov is not None:
        buf.write(f"# {prov['tool']} {prov['version']} config_sha256={prov['config_sha256']}\n")
    if note:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def json_text(obj: dict, prov: dict | None = None) -> str:
    body = dict(obj)
    if prov is not None:
        body = {"provenance": prov, **body}
    return json.dumps(plain(body), indent=2, sort_keys=True) + "\n"


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a CSV written by :func:`csv_text` (comment lines skipped)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def trajectory_rows(times, values) -> list[list[Any]]:
    values = np.asarray(values)
    return [[float(t), *row.tolist()] for t, row in zip(times, values)]
