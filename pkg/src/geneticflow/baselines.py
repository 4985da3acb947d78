"""Author-level indicators and bibliometric-network baselines (co-citation,
bibliographic coupling, co-authorship)."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .corpus import Corpus, write_jsonl
from .gfgraph import ATTRIBUTES, GFNode, ProfileError, _quote, build_full_profile
from .metrics import CVReport, check_cv_labels, fold_metrics, stratified_folds, substream
from .topic_embed import TopicEmbedding

NETWORK_KINDS = ("cc", "bc", "ca")


def h_index(citation_counts) -> int:
    counts = sorted((int(c) for c in citation_counts), reverse=True)
    if counts and counts[-1] < 0:
        raise ValueError("negative citation count")
    h = 0
    for i, c in enumerate(counts, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


@dataclass(frozen=True)
class IndicatorVector:
    scholar_id: str
    n_papers: int
    n_citations: int
    h_index: int

    def as_array(self) -> np.ndarray:
        return np.array([self.n_papers, self.n_citations, self.h_index], dtype=float)

    def to_json(self) -> dict:
        return {"scholar_id": self.scholar_id, "n_papers": self.n_papers, "n_citations": self.n_citations, "h_index": self.h_index}


def indicators(corpus: Corpus, scholar: str) -> IndicatorVector:
    if not corpus.has_author(scholar):
        raise ProfileError(f"unknown author {scholar!r}")
    cits = [corpus.citation_count(p) for p in corpus.papers_of(scholar)]
    return IndicatorVector(scholar, len(cits), int(sum(cits)), h_index(cits))


def export_indicators(path, vectors) -> None:
    write_jsonl(path, (v.to_json() for v in vectors))


# ---------------------------------------------------------------------------
# networks
# ---------------------------------------------------------------------------


@dataclass
class CANode:
    author_id: str
    n_papers: int
    n_citations: int
    is_scholar: bool


@dataclass
class BiblioNetwork:
    """Weighted undirected network around one scholar. Edges are stored once
    with ``u < v``."""

    scholar_id: str
    kind: str
    nodes: dict
    edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def weight(self, u: str, v: str) -> int:
        return self.edges.get((u, v) if u < v else (v, u), 0)

    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        index = {k: i for i, k in enumerate(self.nodes)}
        pairs = list(self.edges)
        src = np.array([index[u] for u, _ in pairs], dtype=np.int64)
        dst = np.array([index[v] for _, v in pairs], dtype=np.int64)
        return src, dst

    def to_json(self) -> dict:
        if self.kind == "ca":
            nodes = [vars(n).copy() for n in self.nodes.values()]
        else:
            nodes = [
                {
                    "paper_id": n.paper_id,
                    "year": n.year,
                    "citation_count": n.citation_count,
                    "author_order": n.author_order,
                    "topic_vector": [float(x) for x in n.topic_vector],
                }
                for n in self.nodes.values()
            ]
        return {
            "kind": self.kind,
            "scholar_id": self.scholar_id,
            "nodes": nodes,
            "edges": [{"src": u, "dst": v, "weight": w} for (u, v), w in self.edges.items()],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)

    def dot_source(self) -> str:
        lines = [f"graph {_quote(self.scholar_id + ':' + self.kind)} {{", "  node [shape=ellipse];"]
        for key in self.nodes:
            lines.append(f"  {_quote(key)};")
        for (u, v), w in self.edges.items():
            lines.append(f"  {_quote(u)} -- {_quote(v)} [weight={w}, penwidth={round(1 + math.log(w), 3)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _pair_counts(groups) -> dict[tuple[str, str], int]:
    counts: Counter[tuple[str, str]] = Counter()
    for members in groups:
        for u, v in combinations(sorted(members), 2):
            counts[(u, v)] += 1
    return dict(sorted(counts.items()))


def build_bibliometric_network(
    corpus: Corpus, scholar: str, kind: str, emb: TopicEmbedding | None = None
) -> BiblioNetwork:
    """CC: papers linked by the number of papers citing both; BC: by the
    number of shared references; CA: scholar and co-authors linked by the
    number of jointly authored papers of the scholar.

    Every citing or referenced paper counts, including the scholar's own.
    """
    if kind not in NETWORK_KINDS:
        raise ValueError(f"unknown network kind {kind!r}")
    if not corpus.has_author(scholar):
        raise ProfileError(f"unknown author {scholar!r}")
    papers = corpus.papers_of(scholar)
    own = set(papers)
    if kind == "ca":
        n_pap: Counter[str] = Counter()
        n_cit: Counter[str] = Counter()
        for pid in papers:
            for a in corpus.papers[pid].authors:
                n_pap[a] += 1
                n_cit[a] += corpus.citation_count(pid)
        order = [scholar] + sorted(a for a in n_pap if a != scholar)
        nodes = {a: CANode(a, n_pap[a], n_cit[a], a == scholar) for a in order}
        edges = _pair_counts(corpus.papers[pid].authors for pid in papers)
        return BiblioNetwork(scholar, kind, nodes, edges)

    nodes = build_full_profile(corpus, scholar, emb).nodes
    if kind == "cc":
        linkers = {c for p in papers for c in corpus.citer_set(p)}
        groups = (corpus.ref_set(c) & own for c in linkers)
    else:
        linkers = {r for p in papers for r in corpus.ref_set(p)}
        groups = (corpus.citer_set(r) & own for r in linkers)
    return BiblioNetwork(scholar, kind, nodes, _pair_counts(groups))


def encode_network(net: BiblioNetwork, selection=ATTRIBUTES) -> np.ndarray:
    """Node encoding: GF attributes for CC/BC, ``[log(1+papers),
    log(1+citations), is_scholar]`` for CA."""
    if net.kind == "ca":
        return np.array([[math.log1p(n.n_papers), math.log1p(n.n_citations), float(n.is_scholar)] for n in net.nodes.values()])
    from .represent import encode_node_features

    return encode_node_features(net, selection)


# ---------------------------------------------------------------------------
# indicator classifier
# ---------------------------------------------------------------------------


@dataclass
class LogisticModel:
    coef: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray

    def decision(self, X: np.ndarray) -> np.ndarray:
        return ((np.asarray(X, dtype=float) - self.mean) * self.scale) @ self.coef + self.intercept


def fit_logistic(X: np.ndarray, y, l2: float = 1e-3) -> LogisticModel:
    """Class-weighted logistic regression on standardised columns
    (zero-variance columns map to 0), fitted with L-BFGS."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n1 = y.sum()
    n0 = len(y) - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("single-class labels: both classes are required")
    w = np.where(y == 1, len(y) / (2 * n1), len(y) / (2 * n0))
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.divide(1.0, std, out=np.zeros_like(std), where=std > 0)
    Z = (X - mean) * scale
    W = w.sum()

    def objective(theta):
        z = Z @ theta[:-1] + theta[-1]
        loss = (w @ (np.logaddexp(0.0, z) - y * z)) / W + 0.5 * l2 * theta[:-1] @ theta[:-1]
        r = w * (0.5 * (1.0 + np.tanh(0.5 * z)) - y) / W
        grad = np.r_[Z.T @ r + l2 * theta[:-1], r.sum()]
        return loss, grad

    res = minimize(objective, np.zeros(Z.shape[1] + 1), jac=True, method="L-BFGS-B")
    return LogisticModel(res.x[:-1], float(res.x[-1]), mean, scale)


def indicator_baseline_eval(
    vectors: list[IndicatorVector],
    labels,
    folds: int = 10,
    repeats: int = 10,
    seed: int = 0,
    threshold_on: str = "train",
) -> CVReport:
    X = np.vstack([v.as_array() for v in vectors])
    y = np.asarray(labels).astype(int)
    check_cv_labels(y, folds)
    shape = (repeats, folds)
    f1, auc, acc = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    for r in range(repeats):
        fold_of = stratified_folds(y, folds, substream(seed, "folds", r))
        for f in range(folds):
            test = fold_of == f
            model = fit_logistic(X[~test], y[~test])
            f1[r, f], auc[r, f], acc[r, f] = fold_metrics(
                y[~test], model.decision(X[~test]), y[test], model.decision(X[test]), threshold_on
            )
    return CVReport(f1, auc, acc, label="indicators", meta={"folds": folds, "repeats": repeats, "seed": seed})
