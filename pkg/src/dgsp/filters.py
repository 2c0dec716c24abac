"""Linear graph filters on digraphs.

The workhorse is the polynomial (shift-invariant) filter
``H = sum_l h_l S^l``, which is well defined for any shift, local, and
distributable.  Spectral filters ``V diag(g) V^{-1}`` (eigenvector GFT)
or ``U diag(g) U^T`` (learned orthonormal basis) act pointwise in the
respective frequency domain.  Node-variant and edge-variant filters
generalize the polynomial form with per-node and per-edge taps.
"""

from __future__ import annotations

import json
import warnings
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .dgft import OrthoBasis
from .gft import EigenBasis
from .graphs import ShiftOperator, as_signal, shift_powers

#: relative imaginary-part threshold for realifying eigen-spectral outputs
COMPLEX_LEAK_TOL = 1e-8


def _as_taps(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or h.size < 1:
        raise ValueError("filter taps must be a nonempty 1-D array")
    return h


def apply_polynomial(S: ShiftOperator, h, x) -> np.ndarray:
    """Apply ``y = sum_l h_l S^l x`` via repeated shifts.

    Cost is ``(L-1) * nnz(S)``; matrix powers are never formed.
    """
    h = _as_taps(h)
    powers = shift_powers(S, x, len(h) - 1)
    y = np.zeros(S.n)
    for hl, xl in zip(h, powers):
        y += hl * xl
    return y


def polynomial_matrix(S: ShiftOperator, h) -> np.ndarray:
    """Dense ``sum_l h_l S^l``; convenience for small problems."""
    h = _as_taps(h)
    mat = S.toarray()
    H = h[0] * np.eye(S.n)
    P = np.eye(S.n)
    for hl in h[1:]:
        P = mat @ P
        H += hl * P
    return H


def apply_spectral(basis, g, x):
    """Pointwise spectral filter through an eigen or orthonormal basis.

    With an `EigenBasis`, computes ``V diag(g) V^{-1} x`` in the complex
    field and returns the real part when the imaginary residue is below
    ``COMPLEX_LEAK_TOL * ||y||``; otherwise the complex output is
    returned as-is with a warning.  With an `OrthoBasis`, computes the
    (symmetric) operator ``U diag(g) U^T x``.
    """
    g = np.asarray(g)
    if g.shape != (basis.n,):
        raise ValueError(f"frequency response length {g.shape} does not match n={basis.n}")
    if isinstance(basis, OrthoBasis):
        x = as_signal(x, basis.n)
        return basis.U @ (np.asarray(g, dtype=float) * (basis.U.T @ x))
    if isinstance(basis, EigenBasis):
        x = np.asarray(x)
        if x.shape != (basis.n,):
            raise ValueError(f"signal length {x.shape} does not match n={basis.n}")
        import scipy.linalg
        xhat = scipy.linalg.solve(basis.V, x.astype(complex))
        y = basis.V @ (g.astype(complex) * xhat)
        leak = np.linalg.norm(y.imag)
        if leak <= COMPLEX_LEAK_TOL * max(np.linalg.norm(y), 1e-300):
            return y.real
        warnings.warn(f"spectral output has imaginary residue {leak:.2e}; "
                      "returning complex values", stacklevel=2)
        return y
    raise TypeError(f"unsupported basis type {type(basis).__name__}")


class TapDesign(NamedTuple):
    h: np.ndarray
    residual: float
    rank: int
    rank_deficient: bool


def design_taps(lam, gdesired, L: int) -> TapDesign:
    """Least-squares fit of real taps to a desired frequency response.

    Solves the Vandermonde system ``[lam_k^l] h = gdesired`` in
    minimum-norm least squares (complex rows are stacked as real and
    imaginary parts).  Repeated eigenvalues make the system rank
    deficient; the minimum-norm solution is returned and flagged.
    """
    lam = np.asarray(lam)
    gdesired = np.asarray(gdesired)
    N = lam.shape[0]
    if gdesired.shape != (N,):
        raise ValueError("desired response must match the eigenvalue count")
    if not 1 <= L <= N:
        raise ValueError(f"tap count must satisfy 1 <= L <= {N}, got {L}")
    V = np.vander(lam.astype(complex), N=L, increasing=True)
    A = np.vstack([V.real, V.imag])
    b = np.concatenate([gdesired.real, gdesired.imag])
    h, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ h - b))
    return TapDesign(h=h, residual=residual, rank=int(rank),
                     rank_deficient=rank < L)


def apply_node_variant(S: ShiftOperator, hmat, x) -> np.ndarray:
    """Node-variant filter ``y = sum_l diag(hmat[:, l]) S^l x``.

    Column ``l`` of ``hmat`` holds each node's weight for the l-times
    shifted input; constant columns reduce to the shift-invariant filter.
    """
    hmat = np.asarray(hmat, dtype=float)
    if hmat.ndim != 2 or hmat.shape[0] != S.n:
        raise ValueError(f"node-variant taps must be (n, L), got {hmat.shape}")
    powers = shift_powers(S, x, hmat.shape[1] - 1)
    y = np.zeros(S.n)
    for l in range(hmat.shape[1]):
        y += hmat[:, l] * powers[l]
    return y


def check_edge_support(S: ShiftOperator, phi) -> None:
    """Raise unless the nonzeros of ``phi`` sit inside the support of S."""
    phi = phi.toarray() if sp.issparse(phi) else np.asarray(phi)
    mask = S.toarray() != 0.0
    bad = (phi != 0.0) & ~mask
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ValueError(f"edge-variant taps have weight at ({r}, {c}) "
                         "outside the shift's support")


def apply_edge_variant(S: ShiftOperator, phis, x, ident: float = 0.0) -> np.ndarray:
    """Edge-variant filter ``y = ident * x + sum_k (phis[k] o S) S^k x``.

    Each term re-weights the shift edgewise (Hadamard product) before
    one extra hop, so term ``k`` is (k+1)-hop local; ``ident`` is the
    optional explicit identity tap.  With every ``phis[k]`` equal to
    all-ones on the support and ``ident = 1`` this reduces to the
    shift-invariant filter with unit taps.
    """
    if len(phis) < 1:
        raise ValueError("need at least one edge-variant tap matrix")
    x = as_signal(x, S.n)
    mats = []
    dense_S = S.toarray()
    for phi in phis:
        check_edge_support(S, phi)
        phi = phi.toarray() if sp.issparse(phi) else np.asarray(phi, dtype=float)
        mats.append(phi * dense_S)
    powers = shift_powers(S, x, len(phis) - 1)
    y = ident * x
    for k, M in enumerate(mats):
        y = y + M @ powers[k]
    return y


def ideal_lowpass(basis: OrthoBasis, K: int, y) -> np.ndarray:
    """Orthogonal projection onto the first ``K`` frequency components.

    Columns of the learned basis are in ascending-frequency order, so
    this keeps the ``K`` smoothest components and removes the rest.
    """
    if not 1 <= K <= basis.n:
        raise ValueError(f"bandwidth must satisfy 1 <= K <= {basis.n}, got {K}")
    y = as_signal(y, basis.n)
    UK = basis.U[:, :K]
    return UK @ (UK.T @ y)


def taps_to_json(h) -> str:
    return json.dumps({"taps": [float(v) for v in np.asarray(h, dtype=float)]})


def taps_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    return _as_taps(obj["taps"])
