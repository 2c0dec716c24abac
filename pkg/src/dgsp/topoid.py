"""Digraph topology inference from nodal observations.

Four estimators, all returning shift/adjacency estimates with exactly
zero diagonal:

* `infer_sem` -- structural equation model: contemporaneous network
  effects plus exogenous inputs, fit row-by-row with an l1 penalty on
  the off-diagonal entries (the exogenous weight is unpenalized).
* `infer_svarm` -- sparse vector autoregression: lagged effects with a
  common support across lags, enforced by a group lasso over per-edge
  lag blocks (the AND rule).
* `infer_cgp` -- causal graph process: lagged polynomial-in-S filters,
  estimated by the divide-and-conquer heuristic (fit unstructured lag
  filters with a commutativity penalty, recover a sparse shift that
  commutes with the first filter, then lasso for the polynomial
  coefficients).
* `infer_commute` -- the shift-invariance step on its own: sparsest
  admissible matrix nearly commuting with a given filter estimate.

`simulate_sem` and `simulate_cgp` provide the matching forward models
for synthetic benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleError, StabilityError
from .graphs import ShiftOperator
from .solvers import lasso_fista, soft_threshold


@dataclass(frozen=True)
class TimeSeries:
    """Endogenous snapshots ``X`` (nodes by time) with optional
    exogenous inputs ``U`` of the same shape."""

    X: np.ndarray
    U: np.ndarray | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        object.__setattr__(self, "X", X)
        if X.shape[1] < 1:
            raise ValueError("time series needs at least one snapshot")
        if self.U is not None:
            U = np.atleast_2d(np.asarray(self.U, dtype=float))
            if U.shape != X.shape:
                raise ValueError(f"exogenous inputs shape {U.shape} does not "
                                 f"match endogenous {X.shape}")
            object.__setattr__(self, "U", U)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def T(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SemEstimate:
    S: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class SvarmEstimate:
    Smats: tuple[np.ndarray, ...]
    support: np.ndarray


@dataclass(frozen=True)
class CgpEstimate:
    S: np.ndarray
    hbar: tuple[np.ndarray, ...]
    Hmats: tuple[np.ndarray, ...]
    commute_residual: float


def infer_sem(ts: TimeSeries, alpha: float, *, max_sweeps: int = 10_000,
              tol: float = 1e-12) -> SemEstimate:
    """Penalized least-squares SEM fit.

    Solves, for each node i independently (the objective decouples
    across rows),

        min_{s, w}  sum_t (x_it - sum_{j != i} s_j x_jt - w u_it)^2
                    + alpha sum_j |s_j|

    by cyclic coordinate descent with exact soft-threshold updates; the
    exogenous weight ``w`` is unpenalized.  Exogenous inputs are
    required for identifiability.
    """
    if ts.U is None:
        raise ValueError("SEM estimation requires exogenous inputs; "
                         "for purely endogenous data use infer_svarm or infer_cgp")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    X, U = ts.X, ts.U
    n = ts.n
    S = np.zeros((n, n))
    omega = np.zeros(n)
    col_sq = np.sum(X * X, axis=1)
    for i in range(n):
        b = X[i]
        u = U[i]
        u_sq = float(u @ u)
        others = [j for j in range(n) if j != i]
        s = np.zeros(n)
        w = 0.0
        r = b.copy()
        for _ in range(max_sweeps):
            delta = 0.0
            for j in others:
                if col_sq[j] == 0.0:
                    continue
                rho = float(X[j] @ r) + col_sq[j] * s[j]
                new = soft_threshold(rho, 0.5 * alpha) / col_sq[j]
                if new != s[j]:
                    r -= (new - s[j]) * X[j]
                    delta = max(delta, abs(new - s[j]))
                    s[j] = new
            if u_sq > 0.0:
                rho = float(u @ r) + u_sq * w
                new = rho / u_sq
                if new != w:
                    r -= (new - w) * u
                    delta = max(delta, abs(new - w))
                    w = new
            if delta < tol:
                break
        S[i, :] = s
        omega[i] = w
    np.fill_diagonal(S, 0.0)
    return SemEstimate(S=S, omega=omega)


def _group_block_update(PhiTPhi2_eig, b_t, alpha):
    """Exact group-lasso block minimizer via the secular equation.

    Minimizes ``||c - Phi s||^2 + alpha ||s||_2`` given the
    eigendecomposition (d, Q) of ``2 Phi^T Phi`` and ``b_t = Q^T (2 Phi^T c)``.
    """
    d, Q = PhiTPhi2_eig
    if np.linalg.norm(b_t) <= alpha:
        return np.zeros(d.size)
    lo, hi = 0.0, 1.0
    while np.sum((b_t / (d * hi + alpha)) ** 2) > 1.0:
        hi *= 2.0
        if hi > 1e18:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum((b_t / (d * mid + alpha)) ** 2) > 1.0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return Q @ (b_t / (d + alpha / t))


def infer_svarm(ts: TimeSeries, L: int, alpha: float, *, max_sweeps: int = 2000,
                tol: float = 1e-10) -> SvarmEstimate:
    """Group-lasso sparse VAR fit with common support across lags.

    For each target node the lag coefficients of every source node form
    one length-L group; the group penalty zeroes all lags of an edge
    jointly, which implements the AND rule by construction.  Block
    coordinate descent with exact block updates.
    """
    if L < 1:
        raise ValueError("model order must be >= 1")
    if ts.T <= L:
        raise ValueError(f"need more than L={L} snapshots, got T={ts.T}")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    X = ts.X
    n, T = X.shape
    Tp = T - L
    # lag blocks: Phi[j] has column l-1 equal to x_j delayed by l
    blocks = [np.column_stack([X[j, L - l:T - l] for l in range(1, L + 1)])
              for j in range(n)]
    targets = X[:, L:T]

    Smats = [np.zeros((n, n)) for _ in range(L)]
    support = np.zeros((n, n), dtype=bool)
    if alpha == 0.0:
        Phi = np.hstack(blocks)
        for i in range(n):
            coef, *_ = np.linalg.lstsq(Phi, targets[i], rcond=None)
            for j in range(n):
                sj = coef[j * L:(j + 1) * L]
                for l in range(L):
                    Smats[l][i, j] = sj[l]
                support[i, j] = bool(np.any(sj != 0.0))
        return SvarmEstimate(Smats=tuple(Smats), support=support)

    eigs = []
    for j in range(n):
        d, Q = np.linalg.eigh(2.0 * blocks[j].T @ blocks[j])
        eigs.append((np.maximum(d, 0.0), Q))

    for i in range(n):
        b = targets[i]
        s = np.zeros((n, L))
        r = b.copy()
        for _ in range(max_sweeps):
            delta = 0.0
            for j in range(n):
                c = r + blocks[j] @ s[j]
                b_t = eigs[j][1].T @ (2.0 * blocks[j].T @ c)
                new = _group_block_update(eigs[j], b_t, alpha)
                step = new - s[j]
                if np.any(step != 0.0):
                    r -= blocks[j] @ step
                    delta = max(delta, float(np.max(np.abs(step))))
                    s[j] = new
            if delta < tol:
                break
        for j in range(n):
            for l in range(L):
                Smats[l][i, j] = s[j, l]
            support[i, j] = bool(np.any(s[j] != 0.0))
    return SvarmEstimate(Smats=tuple(Smats), support=support)


class CommuteResult(NamedTuple):
    S: np.ndarray
    residual: float


def infer_commute(Hhat, *, nonneg: bool = False, eps: float = 0.0,
                  norm_vertex: int = 0) -> CommuteResult:
    """Sparsest admissible shift nearly commuting with a filter estimate.

    Solves ``min ||S||_1`` subject to zero diagonal, unit out-weight of
    ``norm_vertex`` (the affine normalization that rules out S = 0),
    optional entrywise nonnegativity, and
    ``||Hhat S - S Hhat||_F <= eps``.  When ``Hhat`` is (a multiple of)
    the identity the commutation constraint is vacuous and the
    canonical sparsest member is returned directly: a single unit entry
    at the lexicographically smallest feasible position.
    """
    H = np.asarray(Hhat, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("filter estimate must be square")
    n = H.shape[0]
    if not 0 <= norm_vertex < n:
        raise ValueError(f"normalization vertex out of range for n={n}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")

    scale = np.linalg.norm(H)
    if np.linalg.norm(H - (np.trace(H) / n) * np.eye(n)) <= 1e-12 * max(scale, 1.0):
        S = np.zeros((n, n))
        S[1 if norm_vertex == 0 else 0, norm_vertex] = 1.0
        return CommuteResult(S=S, residual=float(np.linalg.norm(H @ S - S @ H)))

    import cvxpy as cp

    S = cp.Variable((n, n), nonneg=nonneg)
    constraints = [cp.diag(S) == 0, cp.sum(S[:, norm_vertex]) == 1]
    comm = H @ S - S @ H
    if eps == 0.0:
        constraints.append(comm == 0)
    else:
        constraints.append(cp.norm(comm, "fro") <= eps)
    objective = cp.sum(S) if nonneg else cp.sum(cp.abs(S))
    prob = cp.Problem(cp.Minimize(objective), constraints)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise InfeasibleError(
            f"commutativity program terminated with status {prob.status!r} "
            f"(eps={eps:g}, nonneg={nonneg})", residual=prob.value)
    Sv = np.asarray(S.value, dtype=float)
    if nonneg:
        Sv = np.maximum(Sv, 0.0)
    np.fill_diagonal(Sv, 0.0)
    return CommuteResult(S=Sv, residual=float(np.linalg.norm(H @ Sv - Sv @ H)))


def _cgp_filters(S, hbar):
    mats = []
    n = S.shape[0]
    for l, coeffs in enumerate(hbar, start=1):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (l + 1,):
            raise ValueError(f"lag {l} needs {l + 1} coefficients, got {coeffs.shape}")
        H = coeffs[0] * np.eye(n)
        P = np.eye(n)
        for i in range(1, l + 1):
            P = S @ P
            H += coeffs[i] * P
        mats.append(H)
    return mats


def _companion(Hmats):
    n = Hmats[0].shape[0]
    L = len(Hmats)
    F = np.zeros((n * L, n * L))
    F[:n, :] = np.hstack(Hmats)
    if L > 1:
        F[n:, :-n] = np.eye(n * (L - 1))
    return F


def cgp_fit_objective(Hmats, X_out, X_lags, ridge: float, mu: float) -> float:
    """Stage-one CGP criterion: VAR fit plus ridge plus pairwise
    commutator penalty; exposed for gradient checks."""
    E = X_out - sum(H @ Xl for H, Xl in zip(Hmats, X_lags))
    val = float(np.sum(E * E)) + ridge * sum(float(np.sum(H * H)) for H in Hmats)
    for a in range(len(Hmats)):
        for b in range(a + 1, len(Hmats)):
            C = Hmats[a] @ Hmats[b] - Hmats[b] @ Hmats[a]
            val += mu * float(np.sum(C * C))
    return val


def cgp_fit_gradient(Hmats, X_out, X_lags, ridge: float, mu: float):
    """Analytic gradient of `cgp_fit_objective` in each lag filter."""
    E = X_out - sum(H @ Xl for H, Xl in zip(Hmats, X_lags))
    grads = [-2.0 * E @ Xl.T + 2.0 * ridge * H for H, Xl in zip(Hmats, X_lags)]
    for a in range(len(Hmats)):
        for b in range(a + 1, len(Hmats)):
            Ha, Hb = Hmats[a], Hmats[b]
            C = Ha @ Hb - Hb @ Ha
            grads[a] += 2.0 * mu * (C @ Hb.T - Hb.T @ C)
            grads[b] += 2.0 * mu * (Ha.T @ C - C @ Ha.T)
    return grads


def infer_cgp(ts: TimeSeries, L: int, alpha: float, beta: float, *,
              mu: float = 0.1, ridge: float = 1e-3, nonneg: bool = True,
              norm_vertex: int = 0, max_iters: int = 500,
              tol: float = 1e-10) -> CgpEstimate:
    """Divide-and-conquer causal-graph-process estimator.

    Three stages: (i) fit unstructured lag filters by ridge least
    squares refined with a pairwise commutativity penalty (weight
    ``mu`` times the data energy), since all lag filters of a CGP are
    polynomials in the same shift and therefore commute; (ii) recover a
    sparse shift from the first (least noise-amplified) filter via
    `infer_commute` with commutation slack ``alpha``; (iii) estimate
    the polynomial coefficients of each lag filter on the recovered
    shift's powers by lasso with penalty ``beta``.

    Stage failures propagate with a stage tag in the message.
    """
    if ts.T <= L:
        raise ValueError(f"need more than L={L} snapshots, got T={ts.T}")
    X = ts.X
    n, T = X.shape
    X_out = X[:, L:T]
    X_lags = [X[:, L - l:T - l] for l in range(1, L + 1)]

    # stage (i): ridge init, then descend the commutativity-penalized fit
    Z = np.vstack(X_lags)
    G = Z @ Z.T + ridge * np.eye(n * L)
    Hstack = np.linalg.solve(G.T, (X_out @ Z.T).T).T
    Hmats = [Hstack[:, l * n:(l + 1) * n] for l in range(L)]
    mu_eff = mu * float(np.mean(np.sum(X_out * X_out, axis=0)))
    if L > 1:
        obj = cgp_fit_objective(Hmats, X_out, X_lags, ridge, mu_eff)
        for _ in range(max_iters):
            grads = cgp_fit_gradient(Hmats, X_out, X_lags, ridge, mu_eff)
            gnorm = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
            if gnorm <= 1e-14 * max(1.0, obj):
                break
            t = 1.0 / max(gnorm, 1.0)
            accepted = False
            while t > 1e-16:
                cand = [H - t * g for H, g in zip(Hmats, grads)]
                objc = cgp_fit_objective(cand, X_out, X_lags, ridge, mu_eff)
                if objc <= obj - 1e-4 * t * gnorm * gnorm:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            rel = (obj - objc) / max(obj, 1e-300)
            Hmats, obj = cand, objc
            if rel < tol:
                break

    # stage (ii): sparse shift from the first lag filter
    try:
        commute = infer_commute(Hmats[0], nonneg=nonneg, eps=alpha,
                                norm_vertex=norm_vertex)
    except InfeasibleError as exc:
        raise InfeasibleError(f"CGP stage (ii): {exc}", residual=exc.residual) from exc
    Shat = commute.S

    # stage (iii): per-lag lasso of the filters on the shift's powers
    hbar = []
    powers = [np.eye(n)]
    for _ in range(L):
        powers.append(Shat @ powers[-1])
    for l in range(1, L + 1):
        A = np.column_stack([powers[i].reshape(-1) for i in range(l + 1)])
        res = lasso_fista(A, Hmats[l - 1].reshape(-1), beta)
        hbar.append(res.x)

    return CgpEstimate(S=Shat, hbar=tuple(hbar), Hmats=tuple(Hmats),
                       commute_residual=commute.residual)


def simulate_sem(S, Omega, T: int, noise: float, seed: int) -> TimeSeries:
    """Draw SEM snapshots ``x_t = (I - S)^{-1} (Omega u_t + eps_t)``.

    Requires spectral radius of ``S`` below one so the equilibrium is
    well posed; exogenous inputs are i.i.d. standard normal.
    """
    S = S.toarray() if isinstance(S, ShiftOperator) else np.asarray(S, dtype=float)
    n = S.shape[0]
    Omega = np.asarray(Omega, dtype=float)
    if Omega.ndim == 1:
        Omega = np.diag(Omega)
    if Omega.shape != (n, n):
        raise ValueError(f"Omega must be ({n}, {n}) or a length-{n} diagonal")
    radius = float(np.max(np.abs(np.linalg.eigvals(S))))
    if radius >= 1.0:
        raise StabilityError(radius, what="SEM network matrix")
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, T))
    E = noise * rng.standard_normal((n, T))
    X = np.linalg.solve(np.eye(n) - S, Omega @ U + E)
    return TimeSeries(X=X, U=U)


def simulate_cgp(S, hbar, T: int, noise: float, seed: int,
                 burn_in: int = 1000) -> TimeSeries:
    """Draw causal-graph-process snapshots
    ``x_t = sum_l H_l(S, hbar) x_{t-l} + eps_t``.

    The companion matrix of the lag filters must be stable (spectral
    radius below one); a burn-in period is discarded so the returned
    window is approximately stationary.
    """
    S = S.toarray() if isinstance(S, ShiftOperator) else np.asarray(S, dtype=float)
    Hmats = _cgp_filters(S, hbar)
    L = len(Hmats)
    radius = float(np.max(np.abs(np.linalg.eigvals(_companion(Hmats)))))
    if radius >= 1.0:
        raise StabilityError(radius, what="CGP companion matrix")
    n = S.shape[0]
    rng = np.random.default_rng(seed)
    total = burn_in + T
    E = noise * rng.standard_normal((n, total))
    X = np.zeros((n, total))
    for t in range(total):
        acc = E[:, t].copy()
        for l in range(1, L + 1):
            if t - l >= 0:
                acc += Hmats[l - 1] @ X[:, t - l]
        X[:, t] = acc
    return TimeSeries(X=X[:, burn_in:])
