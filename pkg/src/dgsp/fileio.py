"""File formats: Matrix Market matrices, CSV signals and time series.

Matrices travel as Matrix Market ``coordinate real general`` files
(1-based indices, as the format requires); signals as two-column CSV
with header ``node,value``; time series as CSV with one row per node
and one column per snapshot.  Parsers report the offending file and
line on error.
"""

from __future__ import annotations

import csv

import numpy as np
import scipy.sparse as sp

from .errors import ParseError
from .graphs import DENSE_LIMIT

_MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def save_matrix(path, mat) -> None:
    """Write a matrix (dense, sparse, or ShiftOperator) as Matrix Market."""
    mat = getattr(mat, "mat", mat)
    if sp.issparse(mat):
        coo = mat.tocoo()
        rows, cols, vals = coo.row, coo.col, coo.data
        shape = mat.shape
    else:
        arr = np.asarray(mat, dtype=float)
        rows, cols = np.nonzero(arr)
        vals = arr[rows, cols]
        shape = arr.shape
    order = np.lexsort((rows, cols))
    with open(path, "w", newline="\n") as fh:
        fh.write(_MM_HEADER + "\n")
        fh.write(f"{shape[0]} {shape[1]} {len(vals)}\n")
        for k in order:
            fh.write(f"{rows[k] + 1} {cols[k] + 1} {float(vals[k])!r}\n")


def load_matrix(path):
    """Read a Matrix Market coordinate file.

    Returns a dense ndarray up to `DENSE_LIMIT` rows, CSR above.
    Raises `ParseError` with line context on malformed content or
    out-of-range indices.
    """
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].strip().startswith("%%MatrixMarket"):
        raise ParseError(path, 1, "missing MatrixMarket banner")
    banner = lines[0].strip().lower().split()
    if banner[1:5] != ["matrix", "coordinate", "real", "general"]:
        raise ParseError(path, 1, f"unsupported format {lines[0].strip()!r}; "
                                  "need 'matrix coordinate real general'")
    k = 1
    while k < len(lines) and lines[k].lstrip().startswith("%"):
        k += 1
    if k >= len(lines):
        raise ParseError(path, len(lines), "missing size line")
    parts = lines[k].split()
    if len(parts) != 3:
        raise ParseError(path, k + 1, f"size line needs 'rows cols nnz', got {lines[k].strip()!r}")
    try:
        nrows, ncols, nnz = (int(p) for p in parts)
    except ValueError:
        raise ParseError(path, k + 1, f"non-integer size entry in {lines[k].strip()!r}") from None
    rows = np.empty(nnz, dtype=int)
    cols = np.empty(nnz, dtype=int)
    vals = np.empty(nnz, dtype=float)
    entry = 0
    for ln in range(k + 1, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        if entry >= nnz:
            raise ParseError(path, ln + 1, f"more than the declared {nnz} entries")
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(path, ln + 1, f"entry needs 'row col value', got {text!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(path, ln + 1, f"non-numeric entry in {text!r}") from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise ParseError(path, ln + 1,
                             f"index ({i}, {j}) outside declared shape {nrows}x{ncols}")
        rows[entry], cols[entry], vals[entry] = i - 1, j - 1, v
        entry += 1
    if entry != nnz:
        raise ParseError(path, len(lines), f"declared {nnz} entries but found {entry}")
    if max(nrows, ncols) <= DENSE_LIMIT:
        mat = np.zeros((nrows, ncols))
        mat[rows, cols] = vals
        return mat
    return sp.csr_array((vals, (rows, cols)), shape=(nrows, ncols))


def save_signal(path, x) -> None:
    """Write a graph signal as CSV with header ``node,value``."""
    x = np.asarray(x, dtype=float)
    with open(path, "w", newline="\n") as fh:
        fh.write("node,value\n")
        for i, v in enumerate(x):
            fh.write(f"{i},{float(v)!r}\n")


def load_signal(path) -> np.ndarray:
    """Read a ``node,value`` CSV written by `save_signal`.

    Node indices must cover 0..n-1 exactly once; values round-trip
    bit-exactly through `float.__repr__`.
    """
    pairs = {}
    with open(path) as fh:
        header = fh.readline()
        if header.strip().replace(" ", "") != "node,value":
            raise ParseError(path, 1, f"expected header 'node,value', got {header.strip()!r}")
        for ln, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise ParseError(path, ln, f"expected 'node,value', got {text!r}")
            try:
                node = int(parts[0])
                val = float(parts[1])
            except ValueError:
                raise ParseError(path, ln, f"non-numeric field in {text!r}") from None
            if node in pairs:
                raise ParseError(path, ln, f"duplicate node index {node}")
            pairs[node] = val
    n = len(pairs)
    if n == 0:
        raise ParseError(path, 2, "signal file has no rows")
    if set(pairs) != set(range(n)):
        raise ParseError(path, 2, f"node indices must cover 0..{n - 1} exactly once")
    return np.array([pairs[i] for i in range(n)])


def save_timeseries(path, X) -> None:
    """Write an N x T matrix as CSV, one row per node."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def load_timeseries(path) -> np.ndarray:
    """Read a nodes-by-time CSV written by `save_timeseries`."""
    rows = []
    width = None
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(path, ln, f"row has {len(parts)} columns, expected {width}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(path, ln, f"non-numeric field in {text!r}") from None
    if not rows:
        raise ParseError(path, 1, "time-series file is empty")
    return np.asarray(rows)


def write_csv(path, header, rows) -> None:
    """Write a metrics table deterministically.

    Floats are rendered with ``repr`` (shortest round-trip form), so the
    same data always produces byte-identical files.
    """
    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return str(v)

    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
