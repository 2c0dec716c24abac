"""Eigenvector graph Fourier transform for digraphs.

For a diagonalizable shift ``S = V diag(lambda) V^{-1}`` the analysis
transform is ``x_hat = V^{-1} x`` and the synthesis transform is
``x = V x_hat``.  Eigenvectors of a non-symmetric shift are complex and
non-orthogonal, so conditioning of ``V`` matters: defective or
near-defective shifts are refused rather than silently degraded.

Frequency ordering follows the l1 total variation of the unit-norm
eigenvectors, ascending; ties break by ascending ``|lambda|``, then by
ascending phase of ``lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonDiagonalizableError
from .graphs import ShiftOperator
from .variation import tv_l1

#: refuse the eigenvector GFT above this basis condition number
COND_LIMIT = 1e12


@dataclass(frozen=True)
class EigenBasis:
    """Eigendecomposition of a shift, ordered by total variation.

    Attributes
    ----------
    V : (n, n) complex ndarray
        Eigenvector columns, unit norm, first significant component
        rotated to positive real phase.
    lam : (n,) complex ndarray
        Eigenvalues matching the columns of ``V``.
    vcond : float
        2-norm condition number of ``V``.
    frequencies : (n,) ndarray
        tv_l1 of each eigenvector (the ordering key); all zero when the
        shift has zero spectral radius.
    """

    V: np.ndarray
    lam: np.ndarray
    vcond: float
    frequencies: np.ndarray

    @property
    def n(self) -> int:
        return self.V.shape[0]


def _normalize_columns(V):
    """Unit norm, first significant entry rotated to the positive real axis."""
    V = np.array(V, dtype=complex)
    for k in range(V.shape[1]):
        v = V[:, k]
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            continue
        v = v / nrm
        mags = np.abs(v)
        lead = int(np.argmax(mags > 1e-8 * mags.max()))
        phase = v[lead] / abs(v[lead])
        V[:, k] = v * np.conj(phase)
    return V


def eigen_gft_basis(S: ShiftOperator, *, cond_limit: float = COND_LIMIT) -> EigenBasis:
    """Eigenvector GFT basis of a diagonalizable shift.

    Raises `NonDiagonalizableError` when ``cond(V)`` exceeds
    ``cond_limit`` (defective or nearly defective shift); the learned
    orthonormal transform is the fallback in that case.
    """
    S = S if isinstance(S, ShiftOperator) else ShiftOperator(S)
    mat = S.toarray()
    lam, V = scipy.linalg.eig(mat)
    V = _normalize_columns(V)
    vcond = float(np.linalg.cond(V))
    if not np.isfinite(vcond) or vcond > cond_limit:
        raise NonDiagonalizableError(vcond)

    radius = float(np.max(np.abs(lam))) if lam.size else 0.0
    if radius > 0.0:
        freqs = np.array([tv_l1(S, V[:, k]) for k in range(S.n)])
    else:
        freqs = np.zeros(S.n)  # zero shift: no variation ordering available
    phases = np.angle(lam)
    order = np.lexsort((phases, np.abs(lam), freqs))
    return EigenBasis(V=V[:, order], lam=lam[order], vcond=vcond,
                      frequencies=freqs[order])


def gft(basis: EigenBasis, x) -> np.ndarray:
    """Analysis transform ``x_hat = V^{-1} x`` via a linear solve."""
    x = np.asarray(x)
    if x.shape != (basis.n,):
        raise ValueError(f"signal length {x.shape} does not match n={basis.n}")
    return scipy.linalg.solve(basis.V, x.astype(complex))


def igft(basis: EigenBasis, xhat) -> np.ndarray:
    """Synthesis transform ``x = V x_hat``."""
    xhat = np.asarray(xhat)
    if xhat.shape != (basis.n,):
        raise ValueError(f"coefficient length {xhat.shape} does not match n={basis.n}")
    return basis.V @ xhat
