"""Deterministic CSV/JSON output stamped with the configuration hash."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError

HASH_PREFIX = "# config_hash="
FLOAT_FORMAT = "%.17g"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FORMAT % float(x)
    return str(x)


def write_csv(path, columns: dict, config_hash: str) -> Path:
    """Write equal-length columns, header line first, at 17 significant digits."""
    path = Path(path)
    names = list(columns)
    cols = [np.asarray(columns[n]).ravel() for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {dict(zip(names, map(len, cols)))}")
    with path.open("w", newline="") as fh:
        fh.write(f"{HASH_PREFIX}{config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, expected_hash: str | None = None):
    """Return ``(hash, {column: array})``; refuse a mismatched hash.

    Numeric columns come back as float arrays, anything else as strings.
    """
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(HASH_PREFIX):
            raise ConfigError(f"{path}: missing config hash header")
        h = first[len(HASH_PREFIX):]
        if expected_hash is not None and h != expected_hash:
            raise ConfigError(f"{path}: config hash {h} does not match {expected_hash}")
        rows = list(csv.reader(fh))
    names, data = rows[0], rows[1:]
    # hex digests can look numeric
    cols = {n: np.array([r[i] for r in data]) if n.endswith("hash") else _column([r[i] for r in data])
            for i, n in enumerate(names)}
    return h, cols


def _column(raw):
    try:
        return np.array([float(v) for v in raw])
    except ValueError:
        return np.array(raw)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(float(np.real(x))), "im": _jsonable(float(np.imag(x)))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def load_manifest(run_dir, expected_hash: str | None = None) -> dict:
    """Read ``manifest.json`` and check every CSV in the run against its hash."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    h = manifest.get("config_hash")
    if expected_hash is not None and h != expected_hash:
        raise ConfigError(f"{run_dir}: manifest hash {h} does not match {expected_hash}")
    for name in manifest.get("files", []):
        if name.endswith(".csv"):
            read_csv(run_dir / name, h)
    return manifest


def flat_scalars(d: dict, prefix: str = "") -> dict:
    """Numeric leaves of a nested dict keyed by dotted path."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flat_scalars(v, key + "."))
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            out[key] = v
    return out
