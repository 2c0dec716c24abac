"""Minimal graph neural network over digraphs.

Layers apply a learnable polynomial graph filter followed by an
activation: pointwise ``relu``/``identity`` or the graph-localized
``median``, which replaces each node's value with the median over the
node itself and its in-neighbors.  A linear readout maps the final node
features to class scores; training minimizes cross-entropy by
mini-batch SGD with analytic reverse-mode gradients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graphs import ShiftOperator, as_signal, shift_powers

ACTIVATIONS = ("relu", "median", "identity")


@dataclass
class LayerSpec:
    """One layer: polynomial filter taps plus an activation name."""

    taps: np.ndarray
    activation: str = "relu"

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=float)
        if self.taps.ndim != 1 or self.taps.size < 1:
            raise ValueError("layer taps must be a nonempty 1-D array")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")


def in_neighborhoods(S: ShiftOperator) -> list[np.ndarray]:
    """Closed in-neighborhoods: for each node, itself plus the sources
    of its incoming edges, in ascending node order."""
    rows, cols = S.nonzero_pattern()
    nbrs = [{i} for i in range(S.n)]
    for r, c in zip(rows, cols):
        nbrs[int(r)].add(int(c))
    return [np.array(sorted(s), dtype=int) for s in nbrs]


@dataclass
class GnnModel:
    """Shift, layer stack, and a (classes, n) linear readout."""

    S: ShiftOperator
    layers: list[LayerSpec]
    readout: np.ndarray
    _nbrs: list[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.readout = np.asarray(self.readout, dtype=float)
        if self.readout.ndim != 2 or self.readout.shape[1] != self.S.n:
            raise ValueError(f"readout must be (classes, {self.S.n}), "
                             f"got {self.readout.shape}")
        if not self.layers:
            raise ValueError("need at least one layer")
        self._nbrs = in_neighborhoods(self.S)

    @property
    def num_classes(self) -> int:
        return self.readout.shape[0]


def _median_forward(zhat, nbrs):
    """Lower-median selection over closed in-neighborhoods.

    Returns the activated signal and, per node, the index of the
    selected element (an actual neighborhood member, so the gradient
    convention is well defined).  Even-sized neighborhoods take the
    lower median; value ties resolve to the lowest node index.
    """
    n = zhat.shape[0]
    out = np.empty(n)
    selected = np.empty(n, dtype=int)
    for i in range(n):
        members = nbrs[i]
        vals = zhat[members]
        order = np.argsort(vals, kind="stable")
        pick = order[(members.size - 1) // 2]
        out[i] = vals[pick]
        selected[i] = members[pick]
    return out, selected


def forward(model: GnnModel, x):
    """Run the network; returns (scores, per-layer records).

    Each record holds the layer input, the filtered signal, the
    activated signal, and whatever the activation's backward pass needs.
    """
    z = as_signal(x, model.S.n)
    records = []
    for layer in model.layers:
        powers = shift_powers(model.S, z, layer.taps.size - 1)
        zhat = np.zeros_like(z)
        for hl, p in zip(layer.taps, powers):
            zhat += hl * p
        if layer.activation == "relu":
            znew = np.maximum(zhat, 0.0)
            extra = None
        elif layer.activation == "median":
            znew, extra = _median_forward(zhat, model._nbrs)
        else:
            znew = zhat
            extra = None
        records.append({"input": z, "powers": powers, "zhat": zhat,
                        "z": znew, "selected": extra})
        z = znew
    scores = model.readout @ z
    return scores, records


def _softmax(s):
    e = np.exp(s - np.max(s))
    return e / e.sum()


def loss_and_gradients(model: GnnModel, x, label: int):
    """Cross-entropy loss and analytic gradients for one example.

    Returns ``(loss, tap_grads, readout_grad)``.  Activation
    subgradients: relu takes 0 at 0; median routes the gradient to the
    selected neighborhood element.
    """
    if not 0 <= label < model.num_classes:
        raise ValueError(f"label {label} out of range")
    scores, records = forward(model, x)
    p = _softmax(scores)
    loss = -float(np.log(max(p[label], 1e-300)))
    ds = p.copy()
    ds[label] -= 1.0

    readout_grad = np.outer(ds, records[-1]["z"])
    g = model.readout.T @ ds  # gradient w.r.t. the final features

    tap_grads = [None] * len(model.layers)
    St = model.S.mat.T
    for li in range(len(model.layers) - 1, -1, -1):
        rec = records[li]
        layer = model.layers[li]
        if layer.activation == "relu":
            gz = g * (rec["zhat"] > 0.0)
        elif layer.activation == "median":
            gz = np.zeros_like(g)
            np.add.at(gz, rec["selected"], g)
        else:
            gz = g
        tap_grads[li] = np.array([float(gz @ p) for p in rec["powers"]])
        # back through the filter: sum_l h_l (S^T)^l gz
        acc = layer.taps[-1] * gz
        for hl in layer.taps[-2::-1]:
            acc = np.asarray(St @ acc) + hl * gz
        g = acc
    return loss, tap_grads, readout_grad


@dataclass
class TrainResult:
    model: GnnModel
    loss_curve: np.ndarray
    train_accuracy: float
    val_accuracy: float | None
    diverged: bool


def predict(model: GnnModel, x) -> int:
    scores, _ = forward(model, x)
    return int(np.argmax(scores))


def accuracy(model: GnnModel, dataset) -> float:
    hits = sum(1 for x, label in dataset if predict(model, x) == label)
    return hits / len(dataset)


def train(model: GnnModel, dataset, *, epochs: int = 100, lr: float = 0.05,
          batch: int = 8, seed: int = 0, val_dataset=None) -> TrainResult:
    """Mini-batch SGD on cross-entropy, shuffled per epoch by ``seed``.

    The loss curve records the mean per-example loss of each epoch.  If
    the loss turns non-finite, training aborts and the last finite
    state is returned flagged ``diverged``.
    """
    if not dataset:
        raise ValueError("training set must be nonempty")
    if epochs < 1 or batch < 1:
        raise ValueError("epochs and batch size must be >= 1")
    rng = np.random.default_rng(seed)
    taps = [layer.taps.copy() for layer in model.layers]
    acts = [layer.activation for layer in model.layers]
    readout = model.readout.copy()
    current = GnnModel(S=model.S, readout=readout,
                       layers=[LayerSpec(t, a) for t, a in zip(taps, acts)])
    losses = []
    diverged = False
    for _ in range(epochs):
        order = rng.permutation(len(dataset))
        epoch_loss = 0.0
        for start in range(0, len(order), batch):
            idx = order[start:start + batch]
            tg = [np.zeros_like(t) for t in taps]
            rg = np.zeros_like(readout)
            batch_loss = 0.0
            for k in idx:
                x, label = dataset[k]
                loss, tgs, rgs = loss_and_gradients(current, x, label)
                batch_loss += loss
                for a, b in zip(tg, tgs):
                    a += b
                rg += rgs
            m = len(idx)
            epoch_loss += batch_loss
            if not np.isfinite(batch_loss):
                diverged = True
                break
            for t, gword in zip(taps, tg):
                t -= lr * gword / m
            readout -= lr * rg / m
            current = GnnModel(S=model.S, readout=readout,
                               layers=[LayerSpec(t, a) for t, a in zip(taps, acts)])
        if diverged:
            break
        losses.append(epoch_loss / len(dataset))
    train_acc = accuracy(current, dataset)
    val_acc = accuracy(current, val_dataset) if val_dataset else None
    return TrainResult(model=current, loss_curve=np.asarray(losses),
                       train_accuracy=train_acc, val_accuracy=val_acc,
                       diverged=diverged)


def model_to_json(model: GnnModel) -> str:
    """Serialize taps, activations, and readout (the shift travels
    separately as a Matrix Market file)."""
    return json.dumps({
        "layers": [{"taps": [float(v) for v in layer.taps],
                    "activation": layer.activation} for layer in model.layers],
        "readout": [[float(v) for v in row] for row in model.readout],
    })


def model_from_json(text: str, S: ShiftOperator) -> GnnModel:
    obj = json.loads(text)
    layers = [LayerSpec(np.asarray(d["taps"], dtype=float), d["activation"])
              for d in obj["layers"]]
    return GnnModel(S=S, layers=layers,
                    readout=np.asarray(obj["readout"], dtype=float))
