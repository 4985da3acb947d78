"""Graph neural network over scholar profiles: node encoding, mean-aggregation
message passing on the undirected graph, mean readout and a sigmoid head.

Gradients are derived by hand and verified against finite differences.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .gfgraph import ATTRIBUTES, GFProfile

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


def encode_node_features(profile: GFProfile, selection: Sequence[str] = ATTRIBUTES) -> np.ndarray:
    """Rows ``[log(1+citations), relative year, 1/author order, topic vector]``
    with unselected attributes zeroed."""
    if len(profile.nodes) == 0:
        raise ValueError("empty profile")
    unknown = set(selection) - set(ATTRIBUTES)
    if unknown:
        raise ValueError(f"unknown attribute(s) {sorted(unknown)}")
    nodes = list(profile.nodes.values())
    d = len(nodes[0].topic_vector)
    years = np.array([n.year for n in nodes], dtype=float)
    span = max(1.0, years.max() - years.min())
    X = np.zeros((len(nodes), 3 + d))
    if "citations" in selection:
        X[:, 0] = np.log1p([n.citation_count for n in nodes])
    if "date" in selection:
        X[:, 1] = (years - years.min()) / span
    if "order" in selection:
        X[:, 2] = [1.0 / n.author_order for n in nodes]
    if "topic" in selection and d:
        X[:, 3:] = np.vstack([n.topic_vector for n in nodes])
    return X


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass
class GNNConfig:
    hidden: int = 32
    layers: int = 2
    epochs: int = 200
    lr: float = 0.01
    weight_decay: float = 0.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class GNNParams:
    """Named weight arrays plus fixed input standardisation."""

    arrays: dict[str, np.ndarray]
    n_layers: int
    input_shift: np.ndarray
    input_scale: np.ndarray

    @property
    def names(self) -> list[str]:
        return list(self.arrays)

    @property
    def hidden(self) -> int:
        return self.arrays["bl0"].shape[0]

    @property
    def in_dim(self) -> int:
        return self.arrays["ws0"].shape[0]

    def copy(self) -> "GNNParams":
        return GNNParams({k: v.copy() for k, v in self.arrays.items()}, self.n_layers, self.input_shift.copy(), self.input_scale.copy())

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.arrays.values()])

    def size(self) -> int:
        return sum(v.size for v in self.arrays.values())

    def to_json(self) -> dict:
        return {
            "n_layers": self.n_layers,
            "input_shift": self.input_shift.tolist(),
            "input_scale": self.input_scale.tolist(),
            "arrays": {k: {"shape": list(v.shape), "data": v.ravel().tolist()} for k, v in self.arrays.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GNNParams":
        arrays = {k: np.asarray(v["data"], dtype=float).reshape(v["shape"]) for k, v in obj["arrays"].items()}
        return cls(arrays, obj["n_layers"], np.asarray(obj["input_shift"]), np.asarray(obj["input_scale"]))


def init_params(in_dim: int, hidden: int = 32, layers: int = 2, seed: int = 0, scale: float = 1.0) -> GNNParams:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 7])

    def glorot(a, b):
        lim = scale * math.sqrt(6.0 / (a + b))
        return rng.uniform(-lim, lim, size=(a, b))

    arrays: dict[str, np.ndarray] = {}
    width = in_dim
    for l in range(layers):
        arrays[f"ws{l}"] = glorot(width, hidden)
        arrays[f"wn{l}"] = glorot(width, hidden)
        arrays[f"bl{l}"] = np.zeros(hidden)
        width = hidden
    arrays["wh"] = glorot(hidden, hidden)
    arrays["bh"] = np.zeros(hidden)
    arrays["wo"] = glorot(hidden, 1)[:, 0]
    arrays["bo"] = np.zeros(1)
    return GNNParams(arrays, layers, np.zeros(in_dim), np.ones(in_dim))


def zero_params(in_dim: int, hidden: int = 32, layers: int = 2) -> GNNParams:
    p = init_params(in_dim, hidden, layers)
    for v in p.arrays.values():
        v[...] = 0.0
    return p


# ---------------------------------------------------------------------------
# batched graphs
# ---------------------------------------------------------------------------


@dataclass
class GraphBatch:
    """Disjoint union of graphs: stacked node features, row-normalised
    undirected adjacency (mean over neighbours) and a mean-pooling matrix."""

    X: np.ndarray
    A: sp.csr_matrix
    P: sp.csr_matrix
    sizes: np.ndarray

    @classmethod
    def build(cls, graphs: Sequence, encodings: Sequence[np.ndarray]) -> "GraphBatch":
        if len(graphs) != len(encodings):
            raise ValueError("one encoding per graph required")
        rows, cols = [], []
        offset = 0
        sizes = []
        for g, X in zip(graphs, encodings):
            n = len(X)
            if n != len(g):
                raise ValueError("encoding rows do not match graph nodes")
            src, dst = g.edge_index()
            rows.append(np.r_[src, dst] + offset)
            cols.append(np.r_[dst, src] + offset)
            sizes.append(n)
            offset += n
        N = offset
        sizes = np.asarray(sizes)
        r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
        adj = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(N, N))
        adj.data[:] = 1.0  # duplicate pairs collapse to one neighbour
        deg = np.asarray(adj.sum(axis=1)).ravel()
        inv = np.divide(1.0, deg, out=np.zeros(N), where=deg > 0)
        A = sp.diags(inv) @ adj
        graph_of = np.repeat(np.arange(len(sizes)), sizes)
        P = sp.csr_matrix((1.0 / sizes[graph_of], (graph_of, np.arange(N))), shape=(len(sizes), N))
        X = np.vstack(encodings) if encodings else np.zeros((0, 0))
        return cls(X, A.tocsr(), P, sizes)


def _forward(params: GNNParams, batch: GraphBatch):
    a = params.arrays
    H = (batch.X - params.input_shift) * params.input_scale
    cache = []
    for l in range(params.n_layers):
        AH = batch.A @ H
        H_next = np.tanh(H @ a[f"ws{l}"] + AH @ a[f"wn{l}"] + a[f"bl{l}"])
        cache.append((H, AH, H_next))
        H = H_next
    g = batch.P @ H
    u = np.tanh(g @ a["wh"] + a["bh"])
    logits = u @ a["wo"] + a["bo"][0]
    return logits, (cache, g, u)


def gnn_logits(params: GNNParams, batch: GraphBatch) -> np.ndarray:
    return _forward(params, batch)[0]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def gnn_predict(params: GNNParams, graphs: Sequence, encodings: Sequence[np.ndarray]) -> np.ndarray:
    return _sigmoid(gnn_logits(params, GraphBatch.build(graphs, encodings)))


def gnn_forward(params: GNNParams, profile, encoding: np.ndarray) -> float:
    """Probability score of one profile."""
    if encoding.shape[1] != params.in_dim:
        raise ValueError(f"encoding width {encoding.shape[1]} != model input width {params.in_dim}")
    return float(gnn_predict(params, [profile], [encoding])[0])


def balanced_weights(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y).astype(int)
    n, n1 = len(y), int(y.sum())
    n0 = n - n1
    w = np.zeros(n)
    if n1:
        w[y == 1] = n / (2.0 * n1)
    if n0:
        w[y == 0] = n / (2.0 * n0)
    return w


def loss_and_grad(
    params: GNNParams,
    batch: GraphBatch,
    y: np.ndarray,
    weights: np.ndarray | None = None,
    weight_decay: float = 0.0,
    need_grad: bool = True,
):
    """Class-weighted binary cross-entropy (normalised by total weight) and
    its gradient w.r.t. every parameter array."""
    y = np.asarray(y, dtype=float)
    c = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    logits, (cache, g, u) = _forward(params, batch)
    # softplus(s) - y*s, computed stably
    per = np.logaddexp(0.0, logits) - y * logits
    total_w = c.sum()
    loss = float(c @ per / total_w)
    a = params.arrays
    if weight_decay:
        loss += 0.5 * weight_decay * sum(float((v * v).sum()) for k, v in a.items() if k.startswith("w"))
    if not need_grad:
        return loss, None
    grads: dict[str, np.ndarray] = {}
    ds = c * (_sigmoid(logits) - y) / total_w
    grads["wo"] = u.T @ ds
    grads["bo"] = np.array([ds.sum()])
    du = np.outer(ds, a["wo"]) * (1.0 - u * u)
    grads["wh"] = g.T @ du
    grads["bh"] = du.sum(axis=0)
    dH = batch.P.T @ (du @ a["wh"].T)
    for l in reversed(range(params.n_layers)):
        H, AH, H_next = cache[l]
        dZ = dH * (1.0 - H_next * H_next)
        grads[f"ws{l}"] = H.T @ dZ
        grads[f"wn{l}"] = AH.T @ dZ
        grads[f"bl{l}"] = dZ.sum(axis=0)
        if l:
            dH = dZ @ a[f"ws{l}"].T + batch.A.T @ (dZ @ a[f"wn{l}"].T)
    if weight_decay:
        for k, v in a.items():
            if k.startswith("w"):
                grads[k] = grads[k] + weight_decay * v
    return loss, {k: grads[k] for k in a}


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


@dataclass
class TrainRun:
    seed: int
    epochs: int
    lr: float
    losses: list[float] = field(default_factory=list)
    final_metrics: dict = field(default_factory=dict)


def fit_input_scaling(params: GNNParams, X: np.ndarray) -> None:
    """Standardise input columns with statistics of ``X``; constant columns
    are centred only."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    params.input_shift = mean
    params.input_scale = np.divide(1.0, std, out=np.zeros_like(std), where=std > 1e-12)


def train_on_batch(
    batch: GraphBatch, y, cfg: GNNConfig = GNNConfig(), params: GNNParams | None = None
) -> tuple[GNNParams, TrainRun]:
    """Full-batch Adam on class-weighted cross-entropy."""
    y = np.asarray(y).astype(int)
    if y.min() == y.max():
        raise ValueError("single-class labels: both classes are required")
    if params is None:
        params = init_params(batch.X.shape[1], cfg.hidden, cfg.layers, cfg.seed)
        fit_input_scaling(params, batch.X)
    params = params.copy()
    w = balanced_weights(y)
    m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    v2 = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    run = TrainRun(cfg.seed, cfg.epochs, cfg.lr)
    for epoch in range(1, cfg.epochs + 1):
        loss, grads = loss_and_grad(params, batch, y, w, cfg.weight_decay)
        if not math.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss {loss} at epoch {epoch} (lr={cfg.lr})")
        run.losses.append(loss)
        b1t = 1.0 - cfg.beta1**epoch
        b2t = 1.0 - cfg.beta2**epoch
        for k, arr in params.arrays.items():
            gk = grads[k]
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk
            v2[k] = cfg.beta2 * v2[k] + (1.0 - cfg.beta2) * gk * gk
            arr -= cfg.lr * (m[k] / b1t) / (np.sqrt(v2[k] / b2t) + cfg.eps)
    final, _ = loss_and_grad(params, batch, y, w, cfg.weight_decay, need_grad=False)
    run.final_metrics["loss"] = final
    return params, run


def train_gnn(
    graphs: Sequence, encodings: Sequence[np.ndarray], labels, cfg: GNNConfig = GNNConfig()
) -> tuple[GNNParams, TrainRun]:
    batch = GraphBatch.build(graphs, encodings)
    params, run = train_on_batch(batch, labels, cfg)
    from .metrics import best_f1_threshold

    scores = _sigmoid(gnn_logits(params, batch))
    thr, f1 = best_f1_threshold(labels, scores)
    run.final_metrics.update({"train_f1": f1, "threshold": thr})
    return params, run


def save_model(path, params: GNNParams, cfg: GNNConfig, extra: dict | None = None) -> None:
    obj = {"format": "geneticflow-gnn", "version": 1, "config": vars(cfg), "params": params.to_json()}
    if extra:
        obj.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)


def load_model(path) -> tuple[GNNParams, GNNConfig, dict]:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("format") != "geneticflow-gnn":
        raise ValueError("not a GNN model file")
    return GNNParams.from_json(obj["params"]), GNNConfig(**obj["config"]), obj


# ---------------------------------------------------------------------------
# gradient verification
# ---------------------------------------------------------------------------


@dataclass
class GradCheck:
    max_rel_error: float
    max_abs_error: float
    n_checked: int


def gradient_check(
    params: GNNParams,
    profile,
    encoding: np.ndarray,
    label: int,
    n_samples: int = 200,
    step: float = 1e-5,
    seed: int = 0,
    analytic=None,
) -> GradCheck:
    """Compare analytic gradients with central finite differences on
    ``n_samples`` random parameter entries (all entries if fewer).

    ``analytic`` overrides the gradient function (used to plant faults).
    """
    batch = GraphBatch.build([profile], [encoding])
    y = np.array([label], dtype=float)
    grad_fn = analytic or (lambda p: loss_and_grad(p, batch, y)[1])
    grads = grad_fn(params)
    slots = [(k, i) for k, v in params.arrays.items() for i in range(v.size)]
    rng = np.random.default_rng(seed)
    if len(slots) > n_samples:
        pick = rng.choice(len(slots), size=n_samples, replace=False)
        slots = [slots[i] for i in sorted(pick)]
    work = params.copy()
    max_rel = max_abs = 0.0
    for k, i in slots:
        flat = work.arrays[k].reshape(-1)
        orig = flat[i]
        flat[i] = orig + step
        lp, _ = loss_and_grad(work, batch, y, need_grad=False)
        flat[i] = orig - step
        lm, _ = loss_and_grad(work, batch, y, need_grad=False)
        flat[i] = orig
        num = (lp - lm) / (2.0 * step)
        ana = float(grads[k].reshape(-1)[i])
        err = abs(ana - num)
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(ana), abs(num), 1e-6))
    return GradCheck(max_rel, max_abs, len(slots))
