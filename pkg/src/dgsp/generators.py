"""Synthetic digraphs, signals, and labeled datasets for experiments.

Everything here is deterministic given its seed; these generators back
the CLI's ``synth`` command and the desk-scale benchmark suites.
"""

from __future__ import annotations

import numpy as np

from .graphs import Digraph, ShiftOperator, adjacency_shift, shift_powers


def directed_er(n: int, p: float, seed: int, *, weight_low: float = 1.0,
                weight_high: float = 1.0) -> Digraph:
    """Directed Erdos-Renyi graph: each ordered pair (i, j), i != j,
    carries an edge independently with probability ``p``.

    Weights are drawn uniformly from [weight_low, weight_high]
    (constant 1.0 by default).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    edges = []
    for i in range(n):
        for j in range(n):
            if mask[i, j]:
                w = 1.0 if weight_low == weight_high else \
                    float(rng.uniform(weight_low, weight_high))
                edges.append((i, j, w))
    return Digraph(n, tuple(edges))


def south_north_grid(rows: int, cols: int) -> Digraph:
    """Planar grid with every edge oriented one way.

    Nodes sit at (row, col) with node index ``row * cols + col``; each
    grid edge points from the lexicographically smaller coordinate to
    the larger one (northward for vertical edges, with the eastward
    tie-break for horizontal ones), mimicking a flow field with a
    single global direction.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid needs positive dimensions")
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, r * cols + (c + 1), 1.0))
            if r + 1 < rows:
                edges.append((i, (r + 1) * cols + c, 1.0))
    return Digraph(rows * cols, tuple(edges))


def planted_partition_digraph(n: int, clusters: int, p_in: float, p_out: float,
                              seed: int) -> tuple[Digraph, np.ndarray]:
    """Directed stochastic block model with equal-sized clusters.

    Within-cluster ordered pairs carry an edge with probability
    ``p_in``, across-cluster pairs with ``p_out``.  Returns the graph
    and the cluster label of each node.
    """
    if clusters < 1 or n < clusters:
        raise ValueError("need at least one node per cluster")
    labels = np.array([k * clusters // n for k in range(n)])
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            prob = p_in if labels[i] == labels[j] else p_out
            if rng.random() < prob:
                edges.append((i, j, 1.0))
    return Digraph(n, tuple(edges)), labels


def piecewise_constant_signal(labels, seed: int, *, spread: float = 1.0,
                              noise: float = 0.0) -> np.ndarray:
    """Signal constant on each cluster, levels drawn once per cluster."""
    labels = np.asarray(labels, dtype=int)
    rng = np.random.default_rng(seed)
    levels = spread * rng.standard_normal(labels.max() + 1)
    x = levels[labels]
    if noise > 0.0:
        x = x + noise * rng.standard_normal(labels.size)
    return x


def diffusion_dataset(S: ShiftOperator, sources, samples_per_class: int,
                      L: int, seed: int, *, noise: float = 0.01):
    """Two-or-more-class source-localization dataset.

    Each example diffuses a unit delta placed at its class's source
    node through a random-tap polynomial filter of length ``L`` and
    adds Gaussian measurement noise.  Returns ``(dataset, meta)`` where
    ``dataset`` is a list of (signal, label) pairs.
    """
    sources = [int(s) for s in sources]
    if len(sources) < 2:
        raise ValueError("need at least two source nodes")
    if any(not 0 <= s < S.n for s in sources):
        raise ValueError("source node out of range")
    rng = np.random.default_rng(seed)
    dataset = []
    for label, src in enumerate(sources):
        delta = np.zeros(S.n)
        delta[src] = 1.0
        for _ in range(samples_per_class):
            taps = np.concatenate([[1.0], rng.uniform(0.2, 0.8, size=L - 1)])
            powers = shift_powers(S, delta, L - 1)
            x = np.zeros(S.n)
            for hl, p in zip(taps, powers):
                x += hl * p
            x = x + noise * rng.standard_normal(S.n)
            dataset.append((x, label))
    meta = {"sources": sources, "samples_per_class": samples_per_class,
            "filter_length": L, "noise": noise, "seed": seed}
    return dataset, meta


def random_sparse_shift(n: int, density: float, seed: int, *,
                        radius: float | None = None,
                        nonneg: bool = False) -> np.ndarray:
    """Random sparse shift matrix with zero diagonal.

    Entries are standard normal (absolute value when ``nonneg``) on a
    Bernoulli support; when ``radius`` is given the matrix is rescaled
    to that spectral radius (skipped for nilpotent draws).
    """
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    S = np.where(mask, rng.standard_normal((n, n)), 0.0)
    if nonneg:
        S = np.abs(S)
    if radius is not None:
        r = float(np.max(np.abs(np.linalg.eigvals(S))))
        if r > 0.0:
            S *= radius / r
    return S


def digraph_from_shift(mat) -> Digraph:
    """Digraph whose edges are the off-diagonal nonzeros of a matrix
    (remember: entry (j, i) is the edge i -> j)."""
    mat = np.asarray(mat)
    n = mat.shape[0]
    edges = []
    for j in range(n):
        for i in range(n):
            if i != j and mat[j, i] != 0.0:
                edges.append((i, j, float(mat[j, i])))
    return Digraph(n, tuple(edges))


def bandlimited_signal(U, K: int, seed: int, *, coef_scale: float = 1.0) -> np.ndarray:
    """Random signal in the span of the first ``K`` basis columns."""
    U = np.asarray(U)
    if not 1 <= K <= U.shape[1]:
        raise ValueError(f"bandwidth must lie in [1, {U.shape[1]}]")
    rng = np.random.default_rng(seed)
    coef = coef_scale * rng.standard_normal(K)
    x = U[:, :K] @ coef
    return x.real if np.iscomplexobj(x) else x
