"""Classification metrics, stratified folds and repeated cross-validation reports."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


def substream(seed: int, name: str, *keys: int) -> np.random.Generator:
    """Independent generator for a named purpose, e.g. ``substream(s, "folds", repeat)``."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode()), *[int(k) for k in keys]])


def auc_score(y_true, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties averaged)."""
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(scores, dtype=float)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def f1_score(y_true, y_pred) -> float:
    y = np.asarray(y_true).astype(bool)
    p = np.asarray(y_pred).astype(bool)
    tp = int((y & p).sum())
    denom = int(y.sum()) + int(p.sum())
    return 2.0 * tp / denom if denom else 0.0


def accuracy(y_true, y_pred) -> float:
    return float(np.mean(np.asarray(y_true).astype(bool) == np.asarray(y_pred).astype(bool)))


def best_f1_threshold(y_true, scores) -> tuple[float, float]:
    """Threshold maximising F1 of ``scores >= threshold`` on the given data.

    Candidate cuts sit midway between consecutive distinct scores, so a
    perfectly separated sample of 0/1 scores yields 0.5. Returns
    ``(threshold, f1)``.
    """
    y = np.asarray(y_true).astype(bool)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    distinct_end = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp = np.cumsum(y_sorted)[distinct_end]
    n_pred = distinct_end + 1
    f1 = 2.0 * tp / (n_pred + y.sum())
    j = int(np.argmax(f1))
    cut = distinct_end[j]
    if cut + 1 < len(s_sorted):
        thr = 0.5 * (s_sorted[cut] + s_sorted[cut + 1])
    else:
        thr = -np.inf
    return float(thr), float(f1[j])


def stratified_folds(y, n_folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per sample; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    folds = np.empty(len(y), dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = (offset + np.arange(len(idx))) % n_folds
        offset += len(idx)
    return folds


def check_cv_labels(y, n_folds: int) -> None:
    y = np.asarray(y).astype(int)
    n_pos, n_neg = int((y == 1).sum()), int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("single-class labels: both classes are required")
    if min(n_pos, n_neg) < n_folds:
        raise ValueError(f"too few samples per class ({n_pos} pos, {n_neg} neg) for {n_folds} folds")


@dataclass
class CVReport:
    fold_f1: np.ndarray
    fold_auc: np.ndarray
    fold_acc: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    @staticmethod
    def _mean_std(a: np.ndarray) -> tuple[float, float]:
        per_repeat = a.mean(axis=1)
        return float(per_repeat.mean()), float(per_repeat.std())

    @property
    def f1(self) -> tuple[float, float]:
        return self._mean_std(self.fold_f1)

    @property
    def auc(self) -> tuple[float, float]:
        return self._mean_std(self.fold_auc)

    @property
    def acc(self) -> tuple[float, float]:
        return self._mean_std(self.fold_acc)

    def summary(self) -> str:
        (f, fs), (a, as_), (c, cs) = self.f1, self.auc, self.acc
        return f"{self.label or 'cv'}: F1 {f:.3f}±{fs:.3f}  AUC {a:.3f}±{as_:.3f}  ACC {c:.3f}±{cs:.3f}"

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "f1": list(self.f1),
            "auc": list(self.auc),
            "acc": list(self.acc),
            "fold_f1": self.fold_f1.tolist(),
            "fold_auc": self.fold_auc.tolist(),
            "fold_acc": self.fold_acc.tolist(),
            "meta": self.meta,
        }


def fold_metrics(y_train, train_scores, y_test, test_scores, threshold_on: str = "train") -> tuple[float, float, float]:
    """F1 / AUC / ACC on a test split, thresholding where F1 is best on
    ``threshold_on`` ("train" or "test")."""
    if threshold_on == "train":
        thr, _ = best_f1_threshold(y_train, train_scores)
    elif threshold_on == "test":
        thr, _ = best_f1_threshold(y_test, test_scores)
    else:
        raise ValueError(f"unknown threshold mode {threshold_on!r}")
    pred = np.asarray(test_scores) >= thr
    return f1_score(y_test, pred), auc_score(y_test, test_scores), accuracy(y_test, pred)


def paired_test(a: CVReport, b: CVReport) -> dict:
    """Two-sided paired t-test over matched fold F1 scores of two reports."""
    from scipy.stats import ttest_rel

    x, y = a.fold_f1.ravel(), b.fold_f1.ravel()
    if x.shape != y.shape:
        raise ValueError("reports have different fold layouts")
    diff = x - y
    if np.allclose(diff, diff[0]):
        p = 1.0 if diff[0] == 0 else 0.0
        t = 0.0 if diff[0] == 0 else float(np.sign(diff[0]) * np.inf)
    else:
        res = ttest_rel(x, y)
        t, p = float(res.statistic), float(res.pvalue)
    return {
        "a": a.label,
        "b": b.label,
        "mean_diff": float(diff.mean()),
        "t": t,
        "p_value": p,
        "significant_95": bool(p < 0.05),
    }
