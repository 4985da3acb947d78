"""Award-inference protocol: scholar sampling, per-fold model training,
method comparison and edge-removal sweeps."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..baselines import NETWORK_KINDS, build_bibliometric_network, encode_network, indicator_baseline_eval, indicators
from ..corpus import Corpus
from ..edge_profile.features import EdgeFeatureVector, extractor_for
from ..edge_profile.forest import ForestConfig, fit_forest
from ..gfgraph import ATTRIBUTES, GFProfile, build_full_profile, extract_core_profile, populate_contributions, top_edges
from ..metrics import CVReport, check_cv_labels, fold_metrics, paired_test, stratified_folds, substream
from ..node_profile import AAConfig, AADetector
from ..represent import GNNConfig, GraphBatch, encode_node_features, gnn_logits, train_on_batch
from ..topic_embed import TopicEmbedding, embed_corpus_topics

logger = logging.getLogger(__name__)

METHODS = ("gf-full", "gf-core", "cc", "bc", "ca", "indicators")
DEFAULT_FRACTIONS = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)


class LeakageError(RuntimeError):
    pass


@dataclass
class EvalConfig:
    folds: int = 10
    repeats: int = 10
    n_pos: int = 50
    n_neg: int = 150
    seed: int = 0
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    edge_fraction: float = 1.0
    node_threshold: float = 0.5
    selection: tuple[str, ...] = ATTRIBUTES
    topic_dim: int = 8
    threshold_on: str = "train"
    gnn: GNNConfig = field(default_factory=GNNConfig)
    forest: ForestConfig = field(default_factory=lambda: ForestConfig(n_trees=100))
    aa: AAConfig = field(default_factory=AAConfig)

    def validate(self) -> None:
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("positive and negative sample counts must be >= 1")
        if not 0.0 < self.edge_fraction <= 1.0:
            raise ValueError("edge_fraction outside (0, 1]")
        if self.threshold_on not in ("train", "test"):
            raise ValueError("threshold_on must be 'train' or 'test'")


def sample_scholars(corpus: Corpus, labels: dict[str, int], cfg: EvalConfig) -> tuple[list[str], np.ndarray]:
    """Rank labeled scholars by h-index, cut the shortest top list holding the
    required positives and negatives, then draw each group uniformly from it."""
    ranked = sorted(
        (s for s in labels if corpus.has_author(s)),
        key=lambda s: (-indicators(corpus, s).h_index, s),
    )
    n_pos = n_neg = 0
    cut = None
    for i, s in enumerate(ranked):
        if labels[s]:
            n_pos += 1
        else:
            n_neg += 1
        if n_pos >= cfg.n_pos and n_neg >= cfg.n_neg:
            cut = i + 1
            break
    if cut is None:
        raise ValueError(
            f"labels provide {n_pos} positives and {n_neg} negatives; {cfg.n_pos}/{cfg.n_neg} required"
        )
    top = ranked[:cut]
    rng = substream(cfg.seed, "sampling")
    pos = [s for s in top if labels[s]]
    neg = [s for s in top if not labels[s]]
    chosen = sorted(
        [pos[i] for i in rng.choice(len(pos), cfg.n_pos, replace=False)]
        + [neg[i] for i in rng.choice(len(neg), cfg.n_neg, replace=False)]
    )
    return chosen, np.array([labels[s] for s in chosen], dtype=int)


@dataclass
class FoldAudit:
    """What one fold's models were allowed to see."""

    repeat: int
    fold: int
    test_scholars: frozenset[str]
    test_papers: frozenset[str]
    gnn_train_scholars: frozenset[str] = frozenset()
    extend_train_citations: frozenset[tuple[str, str]] = frozenset()


def audit_fold(a: FoldAudit) -> None:
    leaked = a.gnn_train_scholars & a.test_scholars
    if leaked:
        raise LeakageError(f"repeat {a.repeat} fold {a.fold}: GNN trained on test scholar(s) {sorted(leaked)[:3]}")
    bad = [c for c in a.extend_train_citations if c[0] in a.test_papers or c[1] in a.test_papers]
    if bad:
        raise LeakageError(f"repeat {a.repeat} fold {a.fold}: extend classifier saw test citation(s) {sorted(bad)[:3]}")


class AwardStudy:
    """Shared state for evaluating several methods on one scholar sample.

    Folds, forest seeds and GNN seeds are drawn from named substreams of the
    master seed, so every method sees identical splits and initialisations.
    """

    def __init__(
        self,
        corpus: Corpus,
        labels: dict[str, int],
        cfg: EvalConfig | None = None,
        extend_labels: dict[tuple[str, str], int] | None = None,
        emb: TopicEmbedding | None = None,
    ):
        self.cfg = cfg or EvalConfig()
        self.cfg.validate()
        self.corpus = corpus
        self.labels = labels
        self.extend_labels = dict(extend_labels or {})
        self.scholars, self.y = sample_scholars(corpus, labels, self.cfg)
        check_cv_labels(self.y, self.cfg.folds)
        if emb is None:
            emb = embed_corpus_topics(corpus, self.cfg.topic_dim, seed=self.cfg.seed) if corpus.topics else TopicEmbedding.empty(0)
        self.emb = emb
        self.profiles = {s: build_full_profile(corpus, s, emb) for s in self.scholars}
        self.papers = {s: frozenset(corpus.papers_of(s)) for s in self.scholars}
        self._folds: dict[int, np.ndarray] = {}
        self._extend: dict[tuple[int, int], dict[tuple[str, str], float]] = {}
        self._vectors: dict[tuple[str, str], EdgeFeatureVector] | None = None
        self._mask: np.ndarray | None = None
        self._core: dict[str, GFProfile] | None = None
        self._networks: dict[str, dict] = {}
        self._encodings: dict[str, dict[str, np.ndarray]] = {}
        self._reports: dict[tuple[str, float], CVReport] = {}
        self.audits: list[FoldAudit] = []

    # -- splits and seeds -----------------------------------------------------
    def fold_of(self, r: int) -> np.ndarray:
        if r not in self._folds:
            self._folds[r] = stratified_folds(self.y, self.cfg.folds, substream(self.cfg.seed, "folds", r))
        return self._folds[r]

    def _seed(self, name: str, r: int, f: int) -> int:
        return int(substream(self.cfg.seed, name, r, f).integers(2**31))

    def test_scholars(self, r: int, f: int) -> list[str]:
        return [s for s, k in zip(self.scholars, self.fold_of(r)) if k == f]

    # -- extend probabilities ---------------------------------------------------
    def _feature_vectors(self) -> dict[tuple[str, str], EdgeFeatureVector]:
        if self._vectors is None:
            ex = extractor_for(self.corpus)
            keys = set(self.extend_labels)
            for p in self.profiles.values():
                keys.update((e.dst, e.src) for e in p.edges)
            self._vectors = {k: ex.extract(*k) for k in sorted(keys)}
            mask = np.ones(len(next(iter(self._vectors.values())).mask), dtype=bool) if self._vectors else None
            for fv in self._vectors.values():
                mask &= fv.mask
            self._mask = mask
        return self._vectors

    def _extend_training_citations(self, test_papers: frozenset[str]) -> list[tuple[str, str]]:
        return sorted(c for c in self.extend_labels if c[0] not in test_papers and c[1] not in test_papers)

    def _gnn_training_indices(self, test: np.ndarray) -> np.ndarray:
        return np.flatnonzero(~test)

    def extend_probabilities(self, r: int, f: int) -> dict[tuple[str, str], float]:
        """Extend probability of every profile edge from a classifier trained
        on labeled citations outside the test scholars' papers."""
        key = (r, f)
        if key in self._extend:
            return self._extend[key]
        if not self.extend_labels:
            raise ValueError("extend labels are required for edge ranking")
        vectors = self._feature_vectors()
        test_papers = frozenset().union(*(self.papers[s] for s in self.test_scholars(r, f)))
        train = self._extend_training_citations(test_papers)
        self.audits.append(
            FoldAudit(r, f, frozenset(self.test_scholars(r, f)), test_papers, extend_train_citations=frozenset(train))
        )
        audit_fold(self.audits[-1])
        mask = self._mask
        X = np.vstack([np.where(mask, vectors[c].values, -1.0) for c in train])
        yy = np.array([self.extend_labels[c] for c in train])
        model = fit_forest(X, yy, mask, replace(self.cfg.forest, seed=self._seed("forest", r, f)))
        edges = sorted({(e.dst, e.src) for p in self.profiles.values() for e in p.edges})
        probs = {}
        if edges:
            Xe = np.vstack([np.where(mask, vectors[c].values, -1.0) for c in edges])
            probs = dict(zip(edges, model.predict_matrix(Xe).tolist()))
        self._extend[key] = probs
        return probs

    # -- graphs -----------------------------------------------------------------
    def core_profiles(self) -> dict[str, GFProfile]:
        """Profiles restricted to high-contribution nodes, all edges kept
        (edge ranking is applied per fold)."""
        if self._core is None:
            det = AADetector(self.corpus, self.cfg.aa)
            self._core = {}
            for s, p in self.profiles.items():
                p = populate_contributions(GFProfile.from_json(p.to_json()), self.corpus, det)
                # every edge between kept nodes survives at q = 1, so the
                # placeholder extend probability is never used for ranking
                filled = p.with_extend({(e.dst, e.src): 1.0 for e in p.edges})
                self._core[s] = extract_core_profile(filled, self.cfg.node_threshold, 1.0)
        return self._core

    def _encode(self, graph) -> np.ndarray:
        if len(graph) == 0:
            d = self.emb.dim
            return np.zeros((1, 3 + d))
        if getattr(graph, "kind", "gf") in NETWORK_KINDS:
            return encode_network(graph, self.cfg.selection)
        return encode_node_features(graph, self.cfg.selection)

    def encodings(self, method: str, graphs: dict[str, object]) -> dict[str, np.ndarray]:
        if method not in self._encodings:
            self._encodings[method] = {s: self._encode(g) for s, g in graphs.items()}
        return self._encodings[method]

    def base_graphs(self, method: str) -> dict[str, object]:
        if method == "gf-full":
            return self.profiles
        if method == "gf-core":
            return self.core_profiles()
        if method in NETWORK_KINDS:
            if method not in self._networks:
                self._networks[method] = {
                    s: build_bibliometric_network(self.corpus, s, method, self.emb) for s in self.scholars
                }
            return self._networks[method]
        raise ValueError(f"unknown method {method!r}")

    def fold_graphs(self, method: str, q: float, r: int, f: int) -> list:
        base = self.base_graphs(method)
        graphs = [base[s] for s in self.scholars]
        if q >= 1.0 or method not in ("gf-full", "gf-core"):
            return [_EmptySafe(g) if len(g) == 0 else g for g in graphs]
        probs = self.extend_probabilities(r, f)
        out = []
        for g in graphs:
            if not g.edges:
                out.append(_EmptySafe(g) if len(g) == 0 else g)
                continue
            ranked = top_edges(g.with_extend(probs), q)
            out.append(ranked)
        return out

    # -- evaluation ---------------------------------------------------------------
    def evaluate(self, method: str, q: float | None = None) -> CVReport:
        cfg = self.cfg
        q = cfg.edge_fraction if q is None else q
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
        if not 0.0 < q <= 1.0:
            raise ValueError(f"edge fraction {q} outside (0, 1]")
        key = (method, q if method in ("gf-full", "gf-core") else 1.0)
        if key in self._reports:
            return self._reports[key]
        if method == "indicators":
            vecs = [indicators(self.corpus, s) for s in self.scholars]
            rep = indicator_baseline_eval(vecs, self.y, cfg.folds, cfg.repeats, cfg.seed, cfg.threshold_on)
            self._reports[key] = rep
            return rep
        enc = self.encodings(method, self.base_graphs(method))
        X_list = [enc[s] for s in self.scholars]
        shape = (cfg.repeats, cfg.folds)
        f1, auc, acc = np.zeros(shape), np.zeros(shape), np.zeros(shape)
        for r in range(cfg.repeats):
            fold_of = self.fold_of(r)
            for f in range(cfg.folds):
                test = fold_of == f
                graphs = self.fold_graphs(method, q, r, f)
                train_idx = self._gnn_training_indices(test)
                audit = FoldAudit(
                    r,
                    f,
                    frozenset(self.test_scholars(r, f)),
                    frozenset(),
                    gnn_train_scholars=frozenset(self.scholars[i] for i in train_idx),
                )
                audit_fold(audit)
                self.audits.append(audit)
                batch_all = GraphBatch.build(graphs, X_list)
                train_batch = GraphBatch.build([graphs[i] for i in train_idx], [X_list[i] for i in train_idx])
                gcfg = replace(cfg.gnn, seed=self._seed("gnn", r, f))
                params, _ = train_on_batch(train_batch, self.y[train_idx], gcfg)
                scores = gnn_logits(params, batch_all)
                f1[r, f], auc[r, f], acc[r, f] = fold_metrics(
                    self.y[train_idx], scores[train_idx], self.y[test], scores[test], cfg.threshold_on
                )
            logger.info("%s q=%.2f repeat %d: F1 %.3f", method, q, r, f1[r].mean())
        label = method if q >= 1.0 or method not in ("gf-full", "gf-core") else f"{method}@{q:g}"
        rep = CVReport(f1, auc, acc, label=label, meta={"folds": cfg.folds, "repeats": cfg.repeats, "seed": cfg.seed, "q": q})
        self._reports[key] = rep
        return rep


class _EmptySafe:
    """Stand-in for an empty graph: one isolated all-zero node."""

    def __init__(self, g):
        self.inner = g

    def __len__(self) -> int:
        return 1

    def edge_index(self):
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)


def run_award_inference(
    corpus: Corpus,
    labels: dict[str, int],
    method: str,
    cfg: EvalConfig | None = None,
    extend_labels: dict[tuple[str, str], int] | None = None,
    study: AwardStudy | None = None,
) -> CVReport:
    if not labels or not any(labels.values()) or all(labels.values()):
        raise ValueError("award labels must contain both classes")
    study = study or AwardStudy(corpus, labels, cfg, extend_labels)
    return study.evaluate(method)


def compare_methods(reports: dict[str, CVReport], reference: str = "gf-full") -> list[dict]:
    """Paired fold-level tests of ``reference`` against every other method."""
    if reference not in reports:
        return []
    return [paired_test(reports[reference], rep) for name, rep in reports.items() if name != reference]


@dataclass
class SweepRow:
    view: str
    q: float
    f1_mean: float
    f1_std: float
    auc_mean: float
    auc_std: float


def run_edge_sweep(
    corpus: Corpus,
    labels: dict[str, int],
    fractions=DEFAULT_FRACTIONS,
    cfg: EvalConfig | None = None,
    extend_labels: dict[tuple[str, str], int] | None = None,
    views: tuple[str, ...] = ("full",),
    study: AwardStudy | None = None,
) -> list[SweepRow]:
    """Re-run inference with only the top-q edges by extend probability."""
    fractions = list(fractions)
    if not fractions:
        raise ValueError("empty edge-fraction list")
    for q in fractions:
        if not 0.0 < q <= 1.0:
            raise ValueError(f"edge fraction {q} outside (0, 1]")
    study = study or AwardStudy(corpus, labels, cfg, extend_labels)
    rows = []
    for view in views:
        method = {"full": "gf-full", "core": "gf-core"}[view]
        for q in fractions:
            rep = study.evaluate(method, q)
            (f, fs), (a, as_) = rep.f1, rep.auc
            rows.append(SweepRow(view, q, f, fs, a, as_))
    return rows


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["view", "q", "f1_mean", "f1_std", "auc_mean", "auc_std"])
        for r in rows:
            w.writerow([r.view, f"{r.q:g}", f"{r.f1_mean:.6f}", f"{r.f1_std:.6f}", f"{r.auc_mean:.6f}", f"{r.auc_std:.6f}"])


def write_report(path, reports: dict[str, CVReport], cfg: EvalConfig, paired: list[dict] | None = None) -> None:
    obj = {
        "config": {
            "folds": cfg.folds,
            "repeats": cfg.repeats,
            "n_pos": cfg.n_pos,
            "n_neg": cfg.n_neg,
            "seed": cfg.seed,
            "edge_fraction": cfg.edge_fraction,
            "threshold_on": cfg.threshold_on,
        },
        "methods": {name: rep.to_json() for name, rep in reports.items()},
        "paired_tests": paired or [],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
