"""Signal variation measures on graphs.

Three notions of how much a signal changes over a graph:

* ``tv_quadratic`` -- the Laplacian quadratic form, defined for
  undirected (symmetric, nonnegative) adjacency matrices only.
* ``tv_l1`` -- the l1 deviation from the spectral-radius-normalized
  shift; applicable to digraphs, but constants need not have zero
  variation.
* ``directed_variation`` -- squared-hinge variation counting only
  decreases along edge directions; zero on constants and equal to
  ``tv_quadratic`` on undirected graphs.

``spectral_dispersion`` scores how evenly a candidate orthonormal basis
spreads its directed-variation frequencies.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graphs import ShiftOperator, as_signal

_SYM_TOL = 1e-10


def _as_matrix(A):
    return A.mat if isinstance(A, ShiftOperator) else A


def _edge_arrays(A):
    """(dst_rows, src_cols, weights) of the off-diagonal nonzeros of A."""
    mat = _as_matrix(A)
    if sp.issparse(mat):
        coo = mat.tocoo()
        rows, cols, vals = coo.row, coo.col, coo.data
    else:
        rows, cols = np.nonzero(mat)
        vals = np.asarray(mat)[rows, cols]
    off = rows != cols
    return rows[off], cols[off], vals[off]


def _check_nonneg(vals, what):
    if vals.size and np.min(vals) < 0:
        raise ValueError(f"{what} requires nonnegative weights")


def tv_quadratic(A, x) -> float:
    """Laplacian quadratic form ``sum_{i<j} A_ij (x_i - x_j)^2``.

    Requires a symmetric nonnegative adjacency; equals ``x^T (D - A) x``.
    """
    mat = _as_matrix(A)
    dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat, dtype=float)
    if not np.allclose(dense, dense.T, atol=_SYM_TOL, rtol=0.0):
        raise ValueError("quadratic total variation is defined for undirected "
                         "graphs only; adjacency must be symmetric")
    rows, cols, vals = _edge_arrays(dense)
    _check_nonneg(vals, "tv_quadratic")
    x = as_signal(x, dense.shape[0])
    diff = x[cols] - x[rows]
    # each undirected edge appears twice in the nonzero list
    return float(0.5 * np.dot(vals, diff * diff))


def tv_l1(S, x) -> float:
    """l1 total variation ``||x - S x / rho(S)||_1`` for digraph shifts.

    Accepts complex signals (eigenvectors); raises on shifts with zero
    spectral radius, for which the normalization is undefined.
    """
    S = S if isinstance(S, ShiftOperator) else ShiftOperator(S)
    radius = S.spectral_radius()
    if radius <= 0.0:
        raise ValueError("spectral radius is zero (nilpotent shift); "
                         "tv_l1 normalization S / |lambda_max| is undefined")
    x = np.asarray(x)
    if x.shape != (S.n,):
        raise ValueError(f"signal length {x.shape} does not match n={S.n}")
    return float(np.sum(np.abs(x - (S.mat @ x) / radius)))


def directed_variation(A, x) -> float:
    """Directed variation ``sum_{i != j} A_ji [x_i - x_j]_+^2``.

    An edge (i -> j) contributes only when the signal decreases along
    it (``x_i > x_j``); constants have zero variation.
    """
    rows, cols, vals = _edge_arrays(A)
    _check_nonneg(vals, "directed_variation")
    n = _as_matrix(A).shape[0]
    x = as_signal(x, n)
    drop = np.maximum(x[cols] - x[rows], 0.0)
    return float(np.dot(vals, drop * drop))


def directed_variation_columns(A, U) -> np.ndarray:
    """`directed_variation` of every column of ``U`` at once."""
    rows, cols, vals = _edge_arrays(A)
    U = np.asarray(U, dtype=float)
    if U.shape[0] != _as_matrix(A).shape[0]:
        raise ValueError("column length does not match graph size")
    if vals.size == 0:
        return np.zeros(U.shape[1])
    drop = np.maximum(U[cols, :] - U[rows, :], 0.0)
    return (vals[:, None] * drop * drop).sum(axis=0)


def dv_gradient(A, u) -> np.ndarray:
    """Gradient of `directed_variation` at ``u``.

    DV is continuously differentiable because the hinge is squared:
    grad = 2 sum A_ji [u_i - u_j]_+ (e_i - e_j).
    """
    rows, cols, vals = _edge_arrays(A)
    n = _as_matrix(A).shape[0]
    u = as_signal(u, n)
    g = np.zeros(n)
    if vals.size == 0:
        return g
    drop = 2.0 * vals * np.maximum(u[cols] - u[rows], 0.0)
    np.add.at(g, cols, drop)
    np.subtract.at(g, rows, drop)
    return g


def spectral_dispersion(A, U) -> float:
    """Dispersion ``sum_i [DV(u_{i+1}) - DV(u_i)]^2`` of a basis.

    Small values mean consecutive columns of ``U`` carry evenly spread
    directed-variation frequencies.  ``U`` must be orthonormal.
    """
    U = np.asarray(U, dtype=float)
    gram_err = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
    if gram_err > 1e-6:
        raise ValueError(f"basis is not orthonormal (||U^T U - I||_F = {gram_err:.2e})")
    f = directed_variation_columns(A, U)
    return float(np.sum(np.diff(f) ** 2))
