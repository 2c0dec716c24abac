"""Learned orthonormal digraph Fourier transform.

Finds a real orthonormal basis whose columns carry directed-variation
frequencies ``f_k = DV(u_k)`` spread as evenly as possible, by
minimizing the spectral dispersion ``sum_i [f_{i+1} - f_i]^2`` subject
to ``U^T U = I`` with the first column pinned to the constant vector
(zero frequency) and the last column pinned to the maximal-variation
direction.

The dispersion program is non-convex (Stiefel manifold constraint), so
the solver only guarantees a stationary point: Riemannian gradient
descent over the free interior columns with QR retraction and
backtracking, which makes the objective trace non-increasing by
construction.  Interior columns are initialized from the eigenbasis of
the symmetrized graph Laplacian; results can depend on this choice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .variation import _edge_arrays


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal DGFT basis with its frequencies and solver diagnostics.

    ``U`` columns are in ascending-frequency order with ``f[0] == 0``
    (the constant column).  ``objective`` is the non-increasing
    dispersion trace of the accepted iterates.
    """

    U: np.ndarray
    f: np.ndarray
    converged: bool
    iterations: int
    objective: np.ndarray

    def __post_init__(self):
        gram_err = np.linalg.norm(self.U.T @ self.U - np.eye(self.U.shape[1]))
        if gram_err > 1e-6:
            raise ValueError(f"basis not orthonormal: ||U^T U - I||_F = {gram_err:.2e}")

    @property
    def n(self) -> int:
        return self.U.shape[0]


class _EdgeData:
    """Cached edge arrays of an adjacency, for tight optimizer loops."""

    def __init__(self, A):
        mat = A.mat if hasattr(A, "mat") else np.asarray(A)
        self.n = mat.shape[0]
        self.rows, self.cols, self.vals = _edge_arrays(A)
        if self.vals.size and self.vals.min() < 0:
            raise ValueError("directed variation requires nonnegative weights")

    def dv(self, u) -> float:
        if self.vals.size == 0:
            return 0.0
        drop = np.maximum(u[self.cols] - u[self.rows], 0.0)
        return float(np.dot(self.vals, drop * drop))

    def dv_columns(self, U) -> np.ndarray:
        if self.vals.size == 0:
            return np.zeros(U.shape[1])
        drop = np.maximum(U[self.cols, :] - U[self.rows, :], 0.0)
        return (self.vals[:, None] * drop * drop).sum(axis=0)

    def grad(self, u) -> np.ndarray:
        g = np.zeros(self.n)
        if self.vals.size == 0:
            return g
        drop = 2.0 * self.vals * np.maximum(u[self.cols] - u[self.rows], 0.0)
        np.add.at(g, self.cols, drop)
        np.subtract.at(g, self.rows, drop)
        return g

    def grad_columns(self, U) -> np.ndarray:
        G = np.zeros_like(U)
        if self.vals.size == 0:
            return G
        drop = 2.0 * self.vals[:, None] * np.maximum(U[self.cols, :] - U[self.rows, :], 0.0)
        np.add.at(G, self.cols, drop)
        np.subtract.at(G, self.rows, drop)
        return G


def _ascend_sphere(edges: _EdgeData, u0, max_iters=1000, tol=1e-14):
    """Normalized-gradient ascent of directed variation on the sphere.

    DV is convex and 2-homogeneous, so the update ``u <- g / ||g||``
    never decreases it (generalized power iteration); the gradient is
    orthogonal to the all-ones vector, so iterates started orthogonal
    to it stay there.
    """
    u = u0 / np.linalg.norm(u0)
    val = edges.dv(u)
    for _ in range(max_iters):
        g = edges.grad(u)
        gn = float(np.linalg.norm(g))
        if gn <= 1e-300:
            break
        cand = g / gn
        cval = edges.dv(cand)
        if cval <= val * (1.0 + tol):
            if cval > val:
                u, val = cand, cval
            break
        u, val = cand, cval
    return u, val


def max_dv_direction(A, restarts: int = 20, seed: int = 0):
    """Best local maximizer of directed variation on the unit sphere.

    Runs `restarts` seeded gradient ascents from random starts
    orthogonal to the constant vector and keeps the largest value.
    Returns ``(u, dv_value)``; deterministic given ``seed``.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    edges = _EdgeData(A)
    rng = np.random.default_rng(seed)
    best_u, best_val = None, -np.inf
    for _ in range(restarts):
        u0 = rng.standard_normal(edges.n)
        u0 -= u0.mean()
        nrm = np.linalg.norm(u0)
        if nrm < 1e-12:
            u0 = _complement_of_constant(edges.n)
            nrm = 1.0
        u, val = _ascend_sphere(edges, u0 / nrm)
        if val > best_val:
            best_u, best_val = u, val
    return best_u, float(best_val)


def _complement_of_constant(n):
    u = np.zeros(n)
    u[0], u[1] = 1.0, -1.0
    return u / np.sqrt(2.0)


def _qr_retract(M):
    Q, R = np.linalg.qr(M)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def learn_dgft(A, *, max_iters: int = 5000, step: float = 1.0, tol: float = 1e-8,
               seed: int = 0, restarts: int = 20) -> OrthoBasis:
    """Learn the dispersion-minimizing orthonormal basis of a digraph.

    Parameters
    ----------
    A : ShiftOperator or array
        Nonnegative adjacency (or adjacency-like shift) of the digraph.
    max_iters, step, tol : solver controls
        Riemannian descent iteration cap, initial step for backtracking,
        and relative-decrease stopping threshold.
    seed, restarts : int
        Controls for the maximal-variation direction search.

    Returns
    -------
    OrthoBasis
        ``converged`` is False when the iteration cap was hit before the
        relative decrease dropped below ``tol``; the best iterate is
        still returned.
    """
    mat = A.mat if hasattr(A, "mat") else np.asarray(A)
    n = mat.shape[0]
    if n < 2:
        raise ValueError("dispersion program needs at least 2 nodes")
    edges = _EdgeData(A)

    u1 = np.ones(n) / np.sqrt(n)
    uN, _ = max_dv_direction(A, restarts=restarts, seed=seed)
    uN = uN - np.dot(uN, u1) * u1  # maximizers are orthogonal to constants
    nrm = np.linalg.norm(uN)
    uN = uN / nrm if nrm > 1e-12 else _complement_of_constant(n)

    if n == 2:
        U = np.column_stack([u1, uN])
        f = edges.dv_columns(U)
        obj = float((f[1] - f[0]) ** 2)
        return OrthoBasis(U=U, f=f, converged=True, iterations=0,
                          objective=np.array([obj]))

    B = scipy.linalg.null_space(np.vstack([u1, uN]))  # (n, n-2)

    dense = mat.toarray() if hasattr(mat, "toarray") else np.asarray(mat, dtype=float)
    asym = 0.5 * (dense + dense.T)
    lap = np.diag(asym.sum(axis=1)) - asym
    _, evecs = scipy.linalg.eigh(lap)
    M = B.T @ evecs[:, 1:n - 1]
    Um, _, Vm = np.linalg.svd(M)
    W = Um @ Vm  # polar factor: nearest orthogonal matrix to M

    def assemble(Wc):
        U = np.empty((n, n))
        U[:, 0] = u1
        U[:, 1:-1] = B @ Wc
        U[:, -1] = uN
        return U

    def evaluate(Wc):
        U = assemble(Wc)
        f = edges.dv_columns(U)
        return float(np.sum(np.diff(f) ** 2)), f, U

    obj, f, U = evaluate(W)
    trace = [obj]
    converged = False
    iterations = 0
    for it in range(max_iters):
        iterations = it + 1
        d = np.diff(f)
        coef = np.zeros(n)
        coef[0] = -2.0 * d[0]
        coef[-1] = 2.0 * d[-1]
        coef[1:-1] = 2.0 * (d[:-1] - d[1:])
        dU = edges.grad_columns(U[:, 1:-1]) * coef[1:-1][None, :]
        G = B.T @ dU
        sym = 0.5 * (W.T @ G + G.T @ W)
        R = G - W @ sym
        rnorm = float(np.linalg.norm(R))
        if rnorm <= 1e-14 * max(1.0, obj):
            converged = True
            break
        t = step
        accepted = False
        while t > 1e-14:
            Wc = _qr_retract(W - t * R)
            objc, fc, Uc = evaluate(Wc)
            if objc <= obj - 1e-4 * t * rnorm * rnorm:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = True  # no descent possible at working precision
            break
        rel = (obj - objc) / max(obj, 1e-300)
        W, obj, f, U = Wc, objc, fc, Uc
        trace.append(obj)
        if rel < tol:
            converged = True
            break

    order = np.argsort(f[1:-1], kind="stable")
    U = np.column_stack([U[:, 0], U[:, 1:-1][:, order], U[:, -1]])
    f = np.concatenate([[f[0]], f[1:-1][order], [f[-1]]])
    return OrthoBasis(U=U, f=f, converged=converged, iterations=iterations,
                      objective=np.asarray(trace))


def export_basis(basis: OrthoBasis, csv_path, json_path) -> None:
    """Write the basis matrix as CSV plus a JSON sidecar.

    The sidecar records frequencies, convergence flag, iteration count,
    and the dispersion objective trace.
    """
    with open(csv_path, "w", newline="\n") as fh:
        for row in basis.U:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    sidecar = {
        "frequencies": [float(v) for v in basis.f],
        "converged": bool(basis.converged),
        "iterations": int(basis.iterations),
        "objective": [float(v) for v in basis.objective],
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
