"""JSON encoding shared by the CLI and tests.  Complex numbers are [re, im]."""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import InputError


def cpair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def clist(values) -> list:
    return [cpair(z) for z in np.ravel(values)]


def cmatrix(a) -> list:
    return [[cpair(z) for z in row] for row in np.asarray(a)]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; complex values become pairs."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path, data) -> None:
    """Write via a temp file in the target directory, then rename over path."""
    if isinstance(data, str):
        data = data.encode()
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_many(outputs: dict) -> None:
    """Stage every file as a temp file first so a failure leaves no outputs."""
    staged = []
    try:
        for path, data in outputs.items():
            if isinstance(data, str):
                data = data.encode()
            path = os.fspath(path)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
            staged.append((tmp, path))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def parse_matrix(doc) -> np.ndarray:
    """Matrix from ``{"n": n, "entries": [[[re, im], ...], ...]}``."""
    if not isinstance(doc, dict) or "n" not in doc or "entries" not in doc:
        raise InputError('matrix file must be an object with "n" and "entries"')
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError("n must be a positive integer")
    rows = doc["entries"]
    if not isinstance(rows, list) or len(rows) != n:
        raise InputError(f"entries must have {n} rows")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InputError(f"row {i} must have {n} entries")
        for j, z in enumerate(row):
            ok = (isinstance(z, list) and len(z) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z))
            if not ok:
                raise InputError(f"entry ({i}, {j}) must be a [re, im] pair of numbers")
            out[i, j] = complex(z[0], z[1])
    if not np.all(np.isfinite(out)):
        raise InputError("entries must be finite")
    return out


def read_matrix(path) -> np.ndarray:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    return parse_matrix(doc)


def matrix_doc(c) -> dict:
    c = np.asarray(c)
    return {"n": int(c.shape[0]), "entries": cmatrix(c)}
