"""Directed graphs, shift operators, and graph signals.

Orientation convention used throughout the toolkit: a directed edge
(i -> j) populates entry ``S[j, i]`` of the shift matrix, i.e. the
column indexes the source node and the row the destination.  Applying
the shift therefore moves values *along* edge directions: on the
directed cycle, ``S @ x`` is a circular delay.  The literature is
inconsistent on this point, so every module here inherits this single
convention.

Graph signals are plain 1-D float arrays of length ``n``; no wrapper
type is imposed on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

#: Shift matrices are stored dense up to this node count, CSR-sparse above.
DENSE_LIMIT = 512


@dataclass(frozen=True)
class Digraph:
    """Weighted directed graph on nodes ``0 .. n-1``.

    Parameters
    ----------
    n : int
        Node count.
    edges : tuple of (src, dst, weight)
        Directed edges.  Self loops and duplicate (src, dst) pairs are
        rejected; shift diagonals are the business of `ShiftOperator`.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"node count must be >= 1, got {self.n}")
        object.__setattr__(
            self,
            "edges",
            tuple((int(s), int(d), float(w)) for s, d, w in self.edges),
        )
        seen = set()
        for s, d, w in self.edges:
            if not (0 <= s < self.n and 0 <= d < self.n):
                raise ValueError(f"edge ({s}->{d}) out of range for n={self.n}")
            if s == d:
                raise ValueError(f"self loop on node {s} is not allowed")
            if (s, d) in seen:
                raise ValueError(f"duplicate edge ({s}->{d})")
            seen.add((s, d))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_arrays(self):
        """Edge list as (src, dst, weight) integer/float arrays."""
        if not self.edges:
            return (np.empty(0, dtype=int), np.empty(0, dtype=int),
                    np.empty(0, dtype=float))
        e = np.asarray(self.edges, dtype=float)
        return e[:, 0].astype(int), e[:, 1].astype(int), e[:, 2]


class ShiftOperator:
    """An ``n x n`` graph-shift matrix.

    Entry ``(j, i)`` may be nonzero only if ``i == j`` or the underlying
    digraph has an edge (i -> j).  The canonical instance is the
    adjacency matrix built by `adjacency_shift`; arbitrary matrices can
    be wrapped directly and checked against a digraph with
    `sparsity_within`.
    """

    def __init__(self, mat, *, copy: bool = True):
        if sp.issparse(mat):
            m = mat.tocsr(copy=copy)
            if m.dtype != np.float64:
                m = m.astype(np.float64)
        else:
            m = np.array(mat, dtype=float, copy=copy)
            if m.ndim != 2:
                raise ValueError("shift matrix must be 2-D")
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"shift matrix must be square, got {m.shape}")
        self.mat = m
        self.n = m.shape[0]

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"ShiftOperator(n={self.n}, {kind})"

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.mat)

    def toarray(self) -> np.ndarray:
        if self.is_sparse:
            return self.mat.toarray()
        return np.array(self.mat, copy=True)

    def transpose(self) -> "ShiftOperator":
        return ShiftOperator(self.mat.T, copy=True)

    @property
    def T(self) -> "ShiftOperator":
        return self.transpose()

    def spectral_radius(self) -> float:
        """max |eigenvalue|; cached after the first call."""
        r = getattr(self, "_radius", None)
        if r is None:
            r = float(np.max(np.abs(np.linalg.eigvals(self.toarray()))))
            self._radius = r
        return r

    def nonzero_pattern(self):
        """(rows, cols) of structurally nonzero entries."""
        if self.is_sparse:
            coo = self.mat.tocoo()
            return coo.row, coo.col
        return np.nonzero(self.mat)

    def sparsity_within(self, g: Digraph) -> bool:
        """True if every nonzero sits on the diagonal or on an edge of ``g``."""
        if g.n != self.n:
            return False
        allowed = {(d, s) for s, d, _ in g.edges}
        rows, cols = self.nonzero_pattern()
        for r, c in zip(rows, cols):
            if r != c and (int(r), int(c)) not in allowed:
                return False
        return True


def adjacency_shift(g: Digraph) -> ShiftOperator:
    """Adjacency matrix of ``g`` as a shift operator.

    ``S[j, i]`` equals the weight of edge (i -> j); every other entry is
    zero.  Dense for small graphs, CSR above `DENSE_LIMIT` nodes.
    """
    src, dst, w = g.edge_arrays()
    if g.n <= DENSE_LIMIT:
        mat = np.zeros((g.n, g.n))
        mat[dst, src] = w
    else:
        mat = sp.csr_array((w, (dst, src)), shape=(g.n, g.n))
    return ShiftOperator(mat, copy=False)


def directed_cycle(n: int) -> Digraph:
    """Directed cycle 0 -> 1 -> ... -> n-1 -> 0.

    Its adjacency shift applied to a signal performs a circular delay:
    for ``x = [1, 2, 3, 4]``, ``S @ x = [4, 1, 2, 3]``.
    """
    if n < 2:
        raise ValueError(f"directed cycle needs at least 2 nodes, got {n}")
    return Digraph(n, tuple((k, (k + 1) % n, 1.0) for k in range(n)))


def as_signal(x, n: int | None = None) -> np.ndarray:
    """Validate and convert ``x`` to a 1-D float graph signal."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"graph signal must be 1-D, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise ValueError(f"signal length {x.shape[0]} does not match n={n}")
    return x


def apply_shift(S: ShiftOperator, x) -> np.ndarray:
    """``y = S x``; each node combines values from its in-neighbors."""
    x = as_signal(x, S.n)
    return np.asarray(S.mat @ x)


def shift_powers(S: ShiftOperator, x, L: int) -> list[np.ndarray]:
    """Sequence ``[x, Sx, S^2 x, ..., S^L x]`` by repeated application.

    Never materializes matrix powers, so the cost is ``L * nnz(S)``.
    """
    if L < 0:
        raise ValueError(f"number of shifts must be >= 0, got {L}")
    out = [as_signal(x, S.n)]
    for _ in range(L):
        out.append(np.asarray(S.mat @ out[-1]))
    return out
