"""Deterministic text output: shortest round-trip floats, LF line endings."""
import json
import os
import tempfile

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def compact(obj):
    """Single-line JSON, sorted keys."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=True)


def write_csv(fh, columns, rows, meta=None):
    """Header row then data rows; ``meta`` goes first as a ``# {json}`` line."""
    if meta is not None:
        fh.write("# " + compact(meta) + "\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path, with_meta=False):
    """Read a CSV written by write_csv into a dict of column -> list of str.

    With ``with_meta`` returns (meta, cols); meta is None without a header line.
    """
    meta = None
    with open(path, newline="") as fh:
        line = fh.readline()
        if line.startswith("# "):
            meta = json.loads(line[2:])
            line = fh.readline()
        header = line.rstrip("\n").split(",")
        cols = {h: [] for h in header}
        for line in fh:
            for h, v in zip(header, line.rstrip("\n").split(",")):
                cols[h].append(v)
    return (meta, cols) if with_meta else cols


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temp file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
