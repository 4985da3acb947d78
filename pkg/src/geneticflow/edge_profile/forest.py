"""Extremely randomized trees for extend-type citation probability."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..metrics import CVReport, check_cv_labels, fold_metrics, stratified_folds, substream
from .features import FEATURE_NAMES, EdgeFeatureVector, stack

MODEL_FORMAT = "geneticflow-extend-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    k_features: int | None = None  # None: ceil(sqrt(#available features))
    min_leaf: int = 2  # nodes with fewer samples are not split
    seed: int = 0


@dataclass
class Tree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) raw class counts

    def leaf_fraction(self) -> np.ndarray:
        tot = self.counts.sum(axis=1)
        return np.divide(self.counts[:, 1], tot, out=np.zeros(len(tot)), where=tot > 0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r, n = rows[active], node[active]
            go_left = X[r, self.feature[n]] < self.threshold[n]
            node[r] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] >= 0
        return node

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        return cls(
            np.asarray(obj["feature"], dtype=np.int64),
            np.asarray(obj["threshold"], dtype=float),
            np.asarray(obj["left"], dtype=np.int64),
            np.asarray(obj["right"], dtype=np.int64),
            np.asarray(obj["counts"], dtype=np.int64).reshape(-1, 2),
        )


@dataclass
class ExtendModel:
    trees: list[Tree]
    feature_mask: np.ndarray
    config: ForestConfig
    feature_names: tuple[str, ...] = FEATURE_NAMES
    meta: dict = field(default_factory=dict)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.leaf_fraction()[tree.apply(X)]
        return total / len(self.trees)

    def check_mask(self, mask: np.ndarray) -> None:
        missing = self.feature_mask & ~np.asarray(mask, dtype=bool)
        if missing.any():
            names = [n for n, m in zip(self.feature_names, missing) if m]
            raise ValueError(f"feature mask mismatch: model needs unavailable features {names[:3]}...")

    def predict(self, vectors: list[EdgeFeatureVector]) -> np.ndarray:
        if not vectors:
            return np.zeros(0)
        for fv in vectors:
            self.check_mask(fv.mask)
        return self.predict_matrix(np.vstack([fv.values for fv in vectors]))

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": {
                "n_trees": self.config.n_trees,
                "k_features": self.config.k_features,
                "min_leaf": self.config.min_leaf,
                "seed": self.config.seed,
            },
            "feature_names": list(self.feature_names),
            "feature_mask": self.feature_mask.tolist(),
            "meta": self.meta,
            "trees": [t.to_json() for t in self.trees],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExtendModel":
        if obj.get("format") != MODEL_FORMAT:
            raise ValueError("not an extend model file")
        if obj.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {obj.get('version')}")
        return cls(
            [Tree.from_json(t) for t in obj["trees"]],
            np.asarray(obj["feature_mask"], dtype=bool),
            ForestConfig(**obj["config"]),
            tuple(obj["feature_names"]),
            obj.get("meta", {}),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "ExtendModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _gini_weighted(w0: np.ndarray, w1: np.ndarray) -> np.ndarray:
    """Total weight times Gini impurity, ``W - (w0^2 + w1^2) / W``."""
    tot = w0 + w1
    return np.where(tot > 0, tot - (w0 * w0 + w1 * w1) / np.where(tot > 0, tot, 1.0), 0.0)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    available: np.ndarray,
    k: int,
    min_leaf: int,
    rng: np.random.Generator,
) -> Tree:
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n1 = int(y[idx].sum())
        counts.append((len(idx) - n1, n1))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack_ = [(root, np.arange(len(y)))]
    while stack_:
        node, idx = stack_.pop()
        n0, n1 = counts[node]
        if n0 == 0 or n1 == 0 or len(idx) < min_leaf:
            continue
        Xn = X[idx][:, available]
        lo, hi = Xn.min(axis=0), Xn.max(axis=0)
        nonconst = np.flatnonzero(hi > lo)
        if len(nonconst) == 0:
            continue
        kk = min(k, len(nonconst))
        cand = rng.choice(nonconst, size=kk, replace=False)
        thr = rng.uniform(lo[cand], hi[cand])
        # a draw exactly at the minimum would leave the left child empty
        thr = np.where(thr <= lo[cand], 0.5 * (lo[cand] + hi[cand]), thr)
        go_left = Xn[:, cand] < thr
        wn, yn = w[idx], y[idx]
        wl1 = go_left.T @ (wn * yn)
        wl = go_left.T @ wn
        w1 = float(wn @ yn)
        wt = float(wn.sum())
        wl0 = wl - wl1
        wr1 = w1 - wl1
        wr0 = (wt - wl) - wr1
        parent = _gini_weighted(np.array(wt - w1), np.array(w1))
        gain = parent - _gini_weighted(wl0, wl1) - _gini_weighted(wr0, wr1)
        j = int(np.argmax(gain))
        f = int(np.flatnonzero(available)[cand[j]])
        mask_left = go_left[:, j]
        li, ri = idx[mask_left], idx[~mask_left]
        feature[node] = f
        threshold[node] = float(thr[j])
        l_node = new_node(li)
        r_node = new_node(ri)
        left[node], right[node] = l_node, r_node
        stack_.append((r_node, ri))
        stack_.append((l_node, li))
    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(counts, dtype=np.int64).reshape(-1, 2),
    )


def class_weights(y: np.ndarray) -> np.ndarray:
    """Per-sample weights inversely proportional to class frequency."""
    y = np.asarray(y).astype(int)
    n, n1 = len(y), int(y.sum())
    n0 = n - n1
    return np.where(y == 1, n / (2.0 * n1), n / (2.0 * n0))


def fit_forest(X: np.ndarray, y, mask: np.ndarray | None = None, cfg: ForestConfig = ForestConfig()) -> ExtendModel:
    """Grow ``cfg.n_trees`` extremely randomized trees on the full sample.

    Each node tries ``k`` features drawn among the available non-constant
    ones, one uniform threshold each, and keeps the split with the largest
    class-weighted Gini decrease. Tree ``t`` draws from a generator seeded by
    ``(seed, t)``, so trees can be grown in any order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if len(y) == 0:
        raise ValueError("empty training data")
    if y.min() == y.max():
        raise ValueError("single-class training data")
    mask = np.ones(X.shape[1], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    n_avail = int(mask.sum())
    if n_avail == 0:
        raise ValueError("no available features")
    k = cfg.k_features or math.ceil(math.sqrt(n_avail))
    w = class_weights(y)
    yf = y.astype(float)
    trees = [
        _grow_tree(X, yf, w, mask, k, cfg.min_leaf, np.random.default_rng([cfg.seed & 0xFFFFFFFF, t]))
        for t in range(cfg.n_trees)
    ]
    return ExtendModel(trees, mask.copy(), cfg, meta={"n_samples": len(y), "n_positive": int(y.sum())})


def train_extend_classifier(data: list[tuple[EdgeFeatureVector, int]], cfg: ForestConfig = ForestConfig()) -> ExtendModel:
    if not data:
        raise ValueError("empty training data")
    X, mask = stack([fv for fv, _ in data])
    y = np.array([int(lab) for _, lab in data])
    return fit_forest(X, y, mask, cfg)


def predict_extend_prob(model: ExtendModel, fv: EdgeFeatureVector) -> float:
    model.check_mask(fv.mask)
    return float(model.predict_matrix(fv.values)[0])


def cross_validate_forest(
    X: np.ndarray,
    y,
    mask: np.ndarray | None = None,
    cfg: ForestConfig = ForestConfig(),
    folds: int = 10,
    repeats: int = 10,
    label: str = "extra-trees",
) -> CVReport:
    """Repeated stratified k-fold CV; the F1 threshold is chosen on each
    training split."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    check_cv_labels(y, folds)
    f1 = np.zeros((repeats, folds))
    auc = np.zeros((repeats, folds))
    acc = np.zeros((repeats, folds))
    for r in range(repeats):
        fold_of = stratified_folds(y, folds, substream(cfg.seed, "cv-folds", r))
        for f in range(folds):
            test = fold_of == f
            fold_cfg = ForestConfig(cfg.n_trees, cfg.k_features, cfg.min_leaf, cfg.seed * 1000 + r * folds + f)
            model = fit_forest(X[~test], y[~test], mask, fold_cfg)
            f1[r, f], auc[r, f], acc[r, f] = fold_metrics(
                y[~test], model.predict_matrix(X[~test]), y[test], model.predict_matrix(X[test])
            )
    return CVReport(f1, auc, acc, label=label, meta={"folds": folds, "repeats": repeats, "n_trees": cfg.n_trees})


def cross_validate_classifier(
    data: list[tuple[EdgeFeatureVector, int]],
    cfg: ForestConfig = ForestConfig(),
    folds: int = 10,
    repeats: int = 10,
    exclude_groups: tuple[str, ...] = (),
) -> CVReport:
    """CV over labeled feature vectors, optionally ablating feature groups."""
    from .features import group_mask

    vectors = [fv for fv, _ in data]
    if exclude_groups:
        gm = group_mask(exclude_groups)
        vectors = [fv.restrict(gm) for fv in vectors]
    X, mask = stack(vectors)
    y = np.array([int(lab) for _, lab in data])
    label = "extra-trees" + "".join(f" (-) {g}" for g in exclude_groups)
    return cross_validate_forest(X, y, mask, cfg, folds, repeats, label=label)
