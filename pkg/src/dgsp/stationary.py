"""Weak stationarity on digraphs as a vertex-domain generative model.

A random signal is stationary in a (possibly non-symmetric) shift when
it can be written ``x = H w`` with ``H = sum_l h_l S^l`` and ``w``
white, zero mean, unit variance.  The covariance is then ``H H^T``,
a polynomial in both ``S`` and ``S^T``; for non-normal shifts its
eigenvectors do not coincide with those of ``S``, so estimation targets
the taps ``h`` directly instead of a spectral density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import polynomial_matrix
from .graphs import ShiftOperator

#: dense covariance construction is refused above this size
COV_SIZE_LIMIT = 1024

INPUT_LAWS = ("gaussian", "signed-bernoulli")


@dataclass(frozen=True)
class StationaryModel:
    """Generative model ``x = H(h) w`` with a white input law.

    ``signed-bernoulli`` inputs take values ``+-1/sqrt(p)`` with
    probability ``p/2`` each and 0 otherwise (sparse excitations,
    zero mean, unit variance); ``gaussian`` inputs are standard normal.
    """

    S: ShiftOperator
    h: np.ndarray
    input_law: str = "gaussian"
    p: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        if self.h.ndim != 1 or not 1 <= self.h.size <= self.S.n:
            raise ValueError(f"tap count must lie in [1, {self.S.n}], got {self.h.size}")
        if self.input_law not in INPUT_LAWS:
            raise ValueError(f"input law must be one of {INPUT_LAWS}")
        if self.input_law == "signed-bernoulli" and not 0.0 < self.p <= 1.0:
            raise ValueError("signed-bernoulli probability must lie in (0, 1]")


@dataclass(frozen=True)
class CovarianceEstimate:
    """Symmetric PSD covariance with the sample count it came from.

    ``R`` is None for exact model covariances.
    """

    C: np.ndarray
    R: int | None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        object.__setattr__(self, "C", C)
        if np.max(np.abs(C - C.T), initial=0.0) > 1e-12:
            raise ValueError("covariance must be symmetric to 1e-12")
        if C.shape[0] <= COV_SIZE_LIMIT:
            lam_min = float(np.linalg.eigvalsh(C)[0])
            if lam_min < -1e-10:
                raise ValueError(f"covariance has eigenvalue {lam_min:.3e} < -1e-10")


def _draw_white(rng, model: StationaryModel, shape):
    if model.input_law == "gaussian":
        return rng.standard_normal(shape)
    w = np.zeros(shape)
    u = rng.random(shape)
    signs = rng.random(shape) < 0.5
    active = u < model.p
    w[active] = 1.0 / np.sqrt(model.p)
    w[active & signs] *= -1.0
    return w


def generate(model: StationaryModel, R: int, seed: int) -> np.ndarray:
    """Draw ``R`` stationary samples as columns of an (n, R) matrix."""
    if R < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    W = _draw_white(rng, model, (model.S.n, R))
    X = np.zeros_like(W)
    # Horner evaluation of H w across all columns at once
    X[:] = model.h[-1] * W
    for hl in model.h[-2::-1]:
        X = np.asarray(model.S.mat @ X) + hl * W
    return X


def model_covariance(model: StationaryModel) -> CovarianceEstimate:
    """Exact covariance ``H H^T`` formed densely."""
    if model.S.n > COV_SIZE_LIMIT:
        raise ValueError(f"dense covariance limited to n <= {COV_SIZE_LIMIT}")
    H = polynomial_matrix(model.S, model.h)
    C = H @ H.T
    return CovarianceEstimate(C=0.5 * (C + C.T), R=None)


def estimate_covariance(samples, subtract_mean: bool = False) -> CovarianceEstimate:
    """Sample covariance ``(1/R) sum_r x_r x_r^T``.

    The generative model is zero mean by construction, so the mean is
    not subtracted unless requested.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    R = X.shape[1]
    if R < 1:
        raise ValueError("need at least one sample")
    if subtract_mean:
        X = X - X.mean(axis=1, keepdims=True)
    C = (X @ X.T) / R
    return CovarianceEstimate(C=0.5 * (C + C.T), R=R)


@dataclass
class TapFit:
    h: np.ndarray
    residual: float
    converged: bool
    objective: np.ndarray


def _fit_objective_grad(Chat, S_pows, h):
    H = sum(hl * P for hl, P in zip(h, S_pows))
    E = Chat - H @ H.T
    obj = float(np.sum(E * E))
    EH = E @ H
    grad = np.array([-4.0 * float(np.sum(EH * P)) for P in S_pows])
    return obj, grad


def fit_taps_objective(Chat, S: ShiftOperator, h) -> float:
    """Fit criterion ``||Chat - H(h) H(h)^T||_F^2``; exposed for checks."""
    h = np.asarray(h, dtype=float)
    S_pows = _shift_power_matrices(S, h.size)
    return _fit_objective_grad(np.asarray(Chat, dtype=float), S_pows, h)[0]


def fit_taps_gradient(Chat, S: ShiftOperator, h) -> np.ndarray:
    """Analytic gradient of `fit_taps_objective` with respect to the taps."""
    h = np.asarray(h, dtype=float)
    S_pows = _shift_power_matrices(S, h.size)
    return _fit_objective_grad(np.asarray(Chat, dtype=float), S_pows, h)[1]


def _shift_power_matrices(S: ShiftOperator, L: int):
    mats = [np.eye(S.n)]
    dense = S.toarray()
    for _ in range(L - 1):
        mats.append(dense @ mats[-1])
    return mats


def _moment_init(Chat, S_pows, L):
    """Linearized moment matching: project Chat onto span{sym(S^l)} and
    invert the quadratic tap relation assuming a dominant zero-order tap."""
    basis = [0.5 * (P + P.T) for P in S_pows]
    G = np.array([[np.sum(a * b) for b in basis] for a in basis])
    rhs = np.array([np.sum(Chat * b) for b in basis])
    c, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    h0 = np.sqrt(max(c[0], 1e-12))
    h = np.concatenate([[h0], c[1:] / (2.0 * h0)])
    return h


def fit_taps_from_covariance(Chat, S: ShiftOperator, L: int, *,
                             restarts: int = 5, max_iters: int = 2000,
                             tol: float = 1e-12, seed: int = 0) -> TapFit:
    """Fit filter taps so that ``H(h) H(h)^T`` matches a covariance.

    Gradient descent with backtracking line search on the Frobenius
    criterion, started from a moment-matching initializer plus
    ``restarts`` random restarts (the criterion is invariant to a
    global sign flip of ``h``, and generally non-convex).  Returns the
    best run; ``converged`` is False when no run reached the relative
    decrease threshold within ``max_iters``.
    """
    Chat = np.asarray(Chat, dtype=float)
    if Chat.shape != (S.n, S.n):
        raise ValueError(f"covariance must be ({S.n}, {S.n}), got {Chat.shape}")
    if not 1 <= L <= S.n:
        raise ValueError(f"tap count must lie in [1, {S.n}], got {L}")
    Chat = 0.5 * (Chat + Chat.T)
    S_pows = _shift_power_matrices(S, L)
    rng = np.random.default_rng(seed)
    scale = max(np.sqrt(np.trace(Chat) / S.n), 1e-6)
    starts = [_moment_init(Chat, S_pows, L)]
    starts += [scale * rng.standard_normal(L) for _ in range(restarts)]

    obj_floor = 1e-26 * max(1.0, float(np.sum(Chat * Chat)))
    best = None
    for h0 in starts:
        h = np.asarray(h0, dtype=float).copy()
        obj, grad = _fit_objective_grad(Chat, S_pows, h)
        trace = [obj]
        converged = False
        for _ in range(max_iters):
            if obj <= obj_floor:  # exact fits drive the criterion to zero
                converged = True
                break
            gnorm = np.linalg.norm(grad)
            if gnorm <= 1e-14 * max(1.0, obj):
                converged = True
                break
            t = 1.0 / max(gnorm, 1.0)
            accepted = False
            while t > 1e-16:
                hc = h - t * grad
                objc, gradc = _fit_objective_grad(Chat, S_pows, hc)
                if objc <= obj - 1e-4 * t * gnorm * gnorm:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                converged = True
                break
            rel = (obj - objc) / max(obj, 1e-300)
            h, obj, grad = hc, objc, gradc
            trace.append(obj)
            if rel < tol:
                converged = True
                break
        if best is None or obj < best.residual:
            best = TapFit(h=h, residual=obj, converged=converged,
                          objective=np.asarray(trace))
    return best
