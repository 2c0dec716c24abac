"""Inverse problems driven by polynomial graph filters.

All problems assume observations generated as ``y = H x`` with
``H = sum_l h_l S^l`` and (possibly) selection sampling of the output:

* `deconvolve_sparse` -- recover a sparse input when the filter is known.
* `localize_sources` -- recover only the support of that input.
* `identify_system` -- recover the taps from known input/output pairs,
  with a weighted l1 penalty favoring low filter orders.
* `blind_deconvolve` -- recover input and taps jointly via the convex
  lifted relaxation: the observation is linear in ``Z = x h^T``, and a
  nuclear norm plus row-sparsity penalty stands in for the rank-one,
  sparse-input structure.

Objectives follow the plain squared-norm loss convention of
`dgsp.solvers`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .graphs import ShiftOperator
from .filters import polynomial_matrix
from .sampling import check_sampling_set
from .solvers import LassoResult, lasso_fista, row_shrink, svt


@dataclass(frozen=True)
class DeconProblem:
    """Sparse deconvolution instance with a known filter.

    ``indices`` lists the observed nodes (None means fully observed);
    ``ybar`` holds the observations at those nodes in the same order.
    """

    S: ShiftOperator
    h: np.ndarray
    ybar: np.ndarray
    indices: np.ndarray | None = None
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        object.__setattr__(self, "ybar", np.asarray(self.ybar, dtype=float))
        idx = self.indices
        if idx is not None:
            idx = check_sampling_set(idx, self.S.n)
            object.__setattr__(self, "indices", idx)
        m = self.S.n if idx is None else idx.size
        if self.ybar.shape != (m,):
            raise ValueError(f"expected {m} observations, got {self.ybar.shape}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    def observed_filter(self) -> np.ndarray:
        """The observed rows ``C H`` of the dense filter matrix."""
        H = polynomial_matrix(self.S, self.h)
        return H if self.indices is None else H[self.indices, :]


def deconvolve_sparse(p: DeconProblem, *, max_iters: int = 100_000,
                      tol: float = 1e-10) -> LassoResult:
    """Solve ``min_x ||ybar - C H x||^2 + alpha ||x||_1``.

    Classical sparse regression in the unknown input; see
    `dgsp.solvers.lasso_fista` for the solver and its guarantees.
    """
    HM = p.observed_filter()
    return lasso_fista(HM, p.ybar, p.alpha, max_iters=max_iters, tol=tol)


def localize_sources(p: DeconProblem, threshold: float, **kwargs) -> np.ndarray:
    """Support of the deconvolved input, relative to its largest entry.

    Returns indices ``i`` with ``|x*_i| > threshold * max|x*|``; empty
    when the solution is identically zero.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    res = deconvolve_sparse(p, **kwargs)
    peak = np.max(np.abs(res.x))
    if peak == 0.0:
        return np.empty(0, dtype=int)
    return np.flatnonzero(np.abs(res.x) > threshold * peak)


def identify_system(S: ShiftOperator, X, Ybar, L: int, omega=None,
                    alpha: float = 0.0, indices=None, *,
                    max_iters: int = 100_000, tol: float = 1e-10) -> LassoResult:
    """Estimate filter taps from known inputs and sampled outputs.

    Solves ``min_h sum_r ||ybar_r - C sum_l h_l S^l x_r||^2 +
    alpha ||diag(omega) h||_1``; ``omega`` defaults to all-ones and
    should be nondecreasing so that higher shift powers are penalized
    at least as much as lower ones.

    ``X`` is n-by-R (one input per column), ``Ybar`` is M-by-R with M
    the sampled-node count (all nodes when ``indices`` is None).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != S.n:
        raise ValueError(f"inputs must have {S.n} rows, got {X.shape}")
    R = X.shape[1]
    idx = None if indices is None else check_sampling_set(indices, S.n)
    M = S.n if idx is None else idx.size
    Ybar = np.atleast_2d(np.asarray(Ybar, dtype=float))
    if Ybar.shape != (M, R):
        raise ValueError(f"expected outputs of shape ({M}, {R}), got {Ybar.shape}")
    if omega is None:
        omega = np.ones(L)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (L,) or np.any(omega < 0):
        raise ValueError("omega must be a nonnegative length-L vector")
    if np.any(np.diff(omega) < 0):
        raise ValueError("omega weights must be nondecreasing in the tap index")
    if R * M < L and alpha == 0.0:
        raise ValueError(f"only {R * M} equations for {L} taps with no "
                         "regularization: underdetermined")

    # design matrix: column l stacks the sampled l-times-shifted inputs
    cols = []
    for r in range(R):
        xl = X[:, r]
        shifted = [xl]
        for _ in range(L - 1):
            shifted.append(np.asarray(S.mat @ shifted[-1]))
        block = np.column_stack(shifted)
        cols.append(block if idx is None else block[idx, :])
    A = np.vstack(cols)
    y = Ybar.T.reshape(-1)
    return lasso_fista(A, y, alpha, weights=omega, max_iters=max_iters, tol=tol)


def lifted_forward(S: ShiftOperator, Z) -> np.ndarray:
    """The bilinear observation map on lifted matrices:
    ``A(Z) = sum_l S^l z_l`` with ``z_l`` the columns of ``Z``, so that
    ``A(x h^T) = sum_l h_l S^l x``.  Evaluated Horner-style with one
    shift application per column."""
    Z = np.asarray(Z, dtype=float)
    if Z.shape[0] != S.n:
        raise ValueError(f"lifted matrix must have {S.n} rows, got {Z.shape}")
    y = Z[:, -1]
    for l in range(Z.shape[1] - 2, -1, -1):
        y = np.asarray(S.mat @ y) + Z[:, l]
    return y


def lifted_adjoint(S: ShiftOperator, r, L: int) -> np.ndarray:
    """Adjoint of `lifted_forward`: column ``l`` is ``(S^T)^l r``."""
    r = np.asarray(r, dtype=float)
    cols = [r]
    St = S.mat.T
    for _ in range(L - 1):
        cols.append(np.asarray(St @ cols[-1]))
    return np.column_stack(cols)


def _lifted_matrix(S: ShiftOperator, L: int) -> np.ndarray:
    """Dense (n, n*L) matrix of the lifted map acting on vec-by-columns."""
    mat = S.toarray()
    blocks = [np.eye(S.n)]
    for _ in range(L - 1):
        blocks.append(mat @ blocks[-1])
    return np.hstack(blocks)


@dataclass
class BlindResult:
    Z: np.ndarray
    x: np.ndarray
    h: np.ndarray
    objective: np.ndarray
    converged: bool
    iterations: int
    rho: float = field(repr=False, default=1.0)


def blind_deconvolve(S: ShiftOperator, y, L: int, alpha1: float, alpha2: float,
                     *, rho: float = 1.0, max_iters: int = 20_000,
                     tol: float = 1e-8) -> BlindResult:
    """Blind deconvolution via the lifted convex relaxation.

    Solves ``min_Z ||y - A(Z)||^2 + alpha1 ||Z||_* + alpha2 ||Z||_{2,1}``
    by consensus ADMM with two proximal copies of ``Z`` (singular-value
    thresholding for the nuclear norm, row shrinkage for the mixed
    norm) and residual-balanced penalty adaptation.  The reported
    objective trace is the running best, and the best iterate is
    returned (flagged unconverged if the cap was hit).

    The rank-one factors ``(x, h)`` come from the leading singular pair
    of the solution, normalized so ``||h|| = 1`` with the
    largest-magnitude entry of ``h`` positive; the inherent scaling
    ambiguity ``(c x, h / c)`` is resolved only up to that convention.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (S.n,):
        raise ValueError(f"observation length {y.shape} does not match n={S.n}")
    if L < 1:
        raise ValueError("filter length must be >= 1")
    if alpha1 < 0 or alpha2 < 0:
        raise ValueError("penalty weights must be nonnegative")

    n = S.n
    Amat = _lifted_matrix(S, L)
    AtA = Amat.T @ Amat
    Aty = Amat.T @ y

    def factorize(r):
        return scipy.linalg.cho_factor(2.0 * AtA + 2.0 * r * np.eye(n * L))

    def objective(Z):
        rres = y - Amat @ Z.reshape(n * L, order="F")
        nuc = np.sum(np.linalg.svd(Z, compute_uv=False))
        rows = np.sum(np.linalg.norm(Z, axis=1))
        return float(rres @ rres + alpha1 * nuc + alpha2 * rows)

    chol = factorize(rho)
    Z1 = np.zeros((n, L))
    Z2 = np.zeros((n, L))
    U1 = np.zeros((n, L))
    U2 = np.zeros((n, L))
    best_Z = np.zeros((n, L))
    best_obj = objective(best_Z)
    trace = [best_obj]
    converged = False
    iterations = 0
    for it in range(max_iters):
        iterations = it + 1
        rhs = 2.0 * Aty + rho * (Z1 - U1 + Z2 - U2).reshape(n * L, order="F")
        Z = scipy.linalg.cho_solve(chol, rhs).reshape(n, L, order="F")
        Z1_old, Z2_old = Z1, Z2
        Z1 = svt(Z + U1, alpha1 / rho)
        Z2 = row_shrink(Z + U2, alpha2 / rho)
        U1 = U1 + Z - Z1
        U2 = U2 + Z - Z2

        obj = objective(Z)
        if obj < best_obj:
            best_obj, best_Z = obj, Z.copy()
        trace.append(best_obj)

        prim = np.sqrt(np.linalg.norm(Z - Z1) ** 2 + np.linalg.norm(Z - Z2) ** 2)
        dual = rho * np.sqrt(np.linalg.norm(Z1 - Z1_old) ** 2 +
                             np.linalg.norm(Z2 - Z2_old) ** 2)
        scale = max(np.linalg.norm(Z), 1.0)
        if prim <= tol * scale and dual <= tol * scale:
            converged = True
            break
        if (it + 1) % 50 == 0:  # residual balancing
            if prim > 10.0 * dual:
                rho *= 2.0
                U1 /= 2.0
                U2 /= 2.0
                chol = factorize(rho)
            elif dual > 10.0 * prim:
                rho /= 2.0
                U1 *= 2.0
                U2 *= 2.0
                chol = factorize(rho)

    Zstar = best_Z
    Usv, sv, Vtsv = np.linalg.svd(Zstar, full_matrices=False)
    h = Vtsv[0]
    x = sv[0] * Usv[:, 0]
    lead = np.argmax(np.abs(h))
    if h[lead] < 0:
        h, x = -h, -x
    return BlindResult(Z=Zstar, x=x, h=h, objective=np.asarray(trace),
                       converged=converged, iterations=iterations, rho=rho)


def problem_to_json(p: DeconProblem) -> str:
    """Serialize a deconvolution problem (shift stored densely)."""
    return json.dumps({
        "shift": [[float(v) for v in row] for row in p.S.toarray()],
        "taps": [float(v) for v in p.h],
        "ybar": [float(v) for v in p.ybar],
        "indices": None if p.indices is None else [int(i) for i in p.indices],
        "alpha": float(p.alpha),
    })


def problem_from_json(text: str) -> DeconProblem:
    obj = json.loads(text)
    return DeconProblem(
        S=ShiftOperator(np.asarray(obj["shift"], dtype=float)),
        h=np.asarray(obj["taps"], dtype=float),
        ybar=np.asarray(obj["ybar"], dtype=float),
        indices=None if obj["indices"] is None else np.asarray(obj["indices"], dtype=int),
        alpha=float(obj["alpha"]),
    )
