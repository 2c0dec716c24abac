"""Selection sampling and reconstruction of bandlimited graph signals.

A signal bandlimited to ``K`` basis columns, ``x = V_K c``, can be
recovered from samples at ``M >= K`` nodes whenever the selected rows
``C V_K`` have full column rank; the coefficients come from the
pseudoinverse and conditioning is governed by the smallest singular
value of ``C V_K``.  `greedy_select` designs sampling sets by forward
selection on that singular value.  Complex bases (eigenvector GFTs of
non-symmetric shifts) are supported throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import RankDeficientError

#: singular values below this fraction of the largest are treated as zero
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class BandlimitedModel:
    """Bandlimited signal model spanned by ``K`` basis columns."""

    VK: np.ndarray

    def __post_init__(self):
        VK = np.asarray(self.VK)
        if VK.ndim != 2:
            raise ValueError("basis submatrix must be 2-D")
        object.__setattr__(self, "VK", VK)
        if _rank(VK) < self.K:
            raise ValueError(f"basis columns are linearly dependent "
                             f"(rank < K = {self.K})")

    @property
    def n(self) -> int:
        return self.VK.shape[0]

    @property
    def K(self) -> int:
        return self.VK.shape[1]


def _rank(mat) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def check_sampling_set(indices, n: int) -> np.ndarray:
    """Validate an ordered list of distinct node indices."""
    idx = np.asarray(indices, dtype=int)
    if idx.ndim != 1 or idx.size < 1:
        raise ValueError("sampling set must be a nonempty 1-D index list")
    if idx.size > n:
        raise ValueError(f"sampling set has {idx.size} entries but only {n} nodes exist")
    if np.any((idx < 0) | (idx >= n)):
        raise ValueError(f"sampling index out of range for n={n}")
    if len(set(idx.tolist())) != idx.size:
        raise ValueError("sampling indices must be distinct")
    return idx


def sample(x, indices) -> np.ndarray:
    """Selection sampling: the signal values at the listed nodes, in order."""
    x = np.asarray(x)
    idx = check_sampling_set(indices, x.shape[0])
    return x[idx]


def reconstruct(model: BandlimitedModel, indices, xbar):
    """Recover a bandlimited signal from its samples.

    Returns ``(xhat, coef)`` where ``coef = (C V_K)^+ xbar`` and
    ``xhat = V_K coef``.  Raises `RankDeficientError` (reporting the
    rank found) when the sampled rows cannot determine ``K``
    coefficients.
    """
    idx = check_sampling_set(indices, model.n)
    xbar = np.asarray(xbar)
    if xbar.shape[0] != idx.size:
        raise ValueError(f"got {xbar.shape[0]} samples for {idx.size} sampling nodes")
    CV = model.VK[idx, :]
    rank = _rank(CV)
    if rank < model.K:
        raise RankDeficientError(rank, model.K)
    coef = np.linalg.pinv(CV, rcond=RANK_RTOL) @ xbar
    return model.VK @ coef, coef


class Recoverability(NamedTuple):
    rank: int
    sigma_min: float


def recoverability(model: BandlimitedModel, indices) -> Recoverability:
    """Rank and smallest singular value of the sampled basis rows."""
    idx = check_sampling_set(indices, model.n)
    s = np.linalg.svd(model.VK[idx, :], compute_uv=False)
    return Recoverability(rank=_rank(model.VK[idx, :]), sigma_min=float(s[-1]))


def greedy_select(model: BandlimitedModel, M: int) -> np.ndarray:
    """Greedy sampling-set design maximizing the minimum singular value.

    Seeds with the node whose basis row has the largest norm, then at
    each step adds the node maximizing the smallest singular value of
    the grown row submatrix.  Ties break toward the lowest node index;
    the result is deterministic and invariant to unit-modulus column
    rescalings of the basis.
    """
    if M < model.K:
        raise ValueError(f"need at least K = {model.K} samples, got M = {M}")
    if M > model.n:
        raise ValueError(f"cannot take {M} samples from {model.n} nodes")

    def argmax_lowest(cands, vals, rtol=1e-9):
        # lowest index among candidates within rtol of the best value,
        # so mathematical ties are not broken by rounding noise
        top = max(vals)
        cut = top - rtol * max(abs(top), 1.0)
        return min(j for j, v in zip(cands, vals) if v >= cut)

    chosen: list[int] = []
    remaining = list(range(model.n))
    row_norms = np.linalg.norm(model.VK, axis=1)
    first = argmax_lowest(remaining, [float(row_norms[j]) for j in remaining])
    chosen.append(first)
    remaining.remove(first)
    while len(chosen) < M:
        vals = [float(np.linalg.svd(model.VK[chosen + [j], :],
                                    compute_uv=False)[-1])
                for j in remaining]
        best_j = argmax_lowest(remaining, vals)
        chosen.append(best_j)
        remaining.remove(best_j)
    return np.asarray(chosen, dtype=int)


def sampling_set_to_json(indices) -> str:
    return json.dumps({"indices": [int(i) for i in np.asarray(indices, dtype=int)]})


def sampling_set_from_json(text: str) -> np.ndarray:
    return np.asarray(json.loads(text)["indices"], dtype=int)
