"""Per-citation features for extend-type inference."""

from __future__ import annotations

import math
import re
import weakref
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..corpus import Corpus, citation_time_series, shared_author_count, write_jsonl

FEATURE_GROUPS = {
    "paper-meta": ("citations_cited", "year_diff", "shared_authors"),
    "cite-net": ("cocite_count", "cocite_jaccard", "bibcoupling_count"),
    "temporal": ("xcorr_lag0", "xcorr_lagYd", "xcorr_max"),
    "content": (
        "content_similarity",
        "cite_occurrences",
        "occ_intro",
        "occ_method",
        "occ_eval",
        "pos_paper",
        "pos_section",
        "pos_subsection",
        "pos_sentence",
        "lex_extension",
        "lex_ourprevious",
    ),
}
FEATURE_NAMES: tuple[str, ...] = tuple(n for names in FEATURE_GROUPS.values() for n in names)
N_FEATURES = len(FEATURE_NAMES)
FEATURE_INDEX = {n: i for i, n in enumerate(FEATURE_NAMES)}
MASK_SENTINEL = -1.0
MAX_LAG = 3

_TOKEN = re.compile(r"[a-z0-9]+")
_SECTION_PATTERNS = {
    "occ_intro": re.compile(r"\bintro"),
    "occ_method": re.compile(r"\b(method|approach)"),
    "occ_eval": re.compile(r"\b(experiment|evaluation|result)"),
}
_LEX_EXTENSION = re.compile(r"\b(extension|extends|extend)\b")
_LEX_PREVIOUS = re.compile(r"\b(our previous|we previously|earlier work)\b")


def group_mask(exclude: tuple[str, ...] | list[str] = ()) -> np.ndarray:
    """Boolean feature mask with the named groups switched off."""
    unknown = set(exclude) - set(FEATURE_GROUPS)
    if unknown:
        raise ValueError(f"unknown feature group(s) {sorted(unknown)}")
    mask = np.ones(N_FEATURES, dtype=bool)
    for g in exclude:
        for name in FEATURE_GROUPS[g]:
            mask[FEATURE_INDEX[name]] = False
    return mask


@dataclass
class EdgeFeatureVector:
    citing_id: str
    cited_id: str
    values: np.ndarray
    mask: np.ndarray

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_INDEX[name]])

    def available(self, name: str) -> bool:
        return bool(self.mask[FEATURE_INDEX[name]])

    def restrict(self, mask: np.ndarray) -> "EdgeFeatureVector":
        """Copy with features outside ``mask`` switched off."""
        new_mask = self.mask & np.asarray(mask, dtype=bool)
        values = np.where(new_mask, self.values, MASK_SENTINEL)
        return EdgeFeatureVector(self.citing_id, self.cited_id, values, new_mask)

    def to_json(self) -> dict:
        return {
            "citing_id": self.citing_id,
            "cited_id": self.cited_id,
            "features": {n: (float(v) if m else None) for n, v, m in zip(FEATURE_NAMES, self.values, self.mask)},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EdgeFeatureVector":
        feats = obj["features"]
        mask = np.array([feats.get(n) is not None for n in FEATURE_NAMES])
        values = np.array([feats[n] if m else MASK_SENTINEL for n, m in zip(FEATURE_NAMES, mask)], dtype=float)
        return cls(obj["citing_id"], obj["cited_id"], values, mask)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) < 2:
        return 0.0
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    if den == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(a @ b) / den))


def lagged_correlation(a: np.ndarray, b: np.ndarray, lag: int) -> float:
    """Pearson correlation of ``a[i]`` with ``b[i + lag]`` over overlapping indices."""
    n = len(a)
    if lag >= 0:
        return _pearson(a[: n - lag] if lag else a, b[lag:])
    return _pearson(a[-lag:], b[: n + lag])


def aligned_series(s1: dict[int, int], s2: dict[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Yearly count vectors zero-padded to the common span of both series."""
    years = list(s1) + list(s2)
    if not years:
        return np.zeros(0), np.zeros(0)
    lo, hi = min(years), max(years)
    a = np.zeros(hi - lo + 1)
    b = np.zeros(hi - lo + 1)
    for y, c in s1.items():
        a[y - lo] = c
    for y, c in s2.items():
        b[y - lo] = c
    return a, b


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


class EdgeFeatureExtractor:
    """Computes feature vectors for citations of one corpus, caching
    document vectors and citation series."""

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self._series: dict[str, dict[int, int]] = {}
        docs = {pid: Counter(tokenize(f"{p.title} {p.abstract}")) for pid, p in corpus.papers.items()}
        df: Counter[str] = Counter()
        for tf in docs.values():
            df.update(tf.keys())
        n_docs = len(docs)
        self._idf = {t: math.log((1 + n_docs) / (1 + c)) + 1.0 for t, c in df.items()}
        self._docs = {}
        for pid, tf in docs.items():
            vec = {t: c * self._idf[t] for t, c in tf.items()}
            norm = math.sqrt(sum(v * v for v in vec.values()))
            self._docs[pid] = (vec, norm)

    def series(self, paper_id: str) -> dict[int, int]:
        s = self._series.get(paper_id)
        if s is None:
            s = self._series[paper_id] = citation_time_series(self.corpus, paper_id)
        return s

    def content_similarity(self, p1: str, p2: str) -> float:
        v1, n1 = self._docs[p1]
        v2, n2 = self._docs[p2]
        if n1 == 0.0 or n2 == 0.0:
            return 0.0
        if len(v1) > len(v2):
            v1, v2 = v2, v1
        dot = sum(w * v2.get(t, 0.0) for t, w in v1.items())
        return min(1.0, dot / (n1 * n2))

    def extract(self, citing: str, cited: str) -> EdgeFeatureVector:
        c = self.corpus
        if not c.has_citation(citing, cited):
            raise KeyError(f"citation {citing!r} -> {cited!r} not in corpus")
        values = np.full(N_FEATURES, MASK_SENTINEL)
        mask = np.ones(N_FEATURES, dtype=bool)
        year_diff = c.papers[citing].year - c.papers[cited].year

        def put(name, v):
            values[FEATURE_INDEX[name]] = v

        put("citations_cited", c.citation_count(cited))
        put("year_diff", year_diff)
        put("shared_authors", shared_author_count(c, citing, cited))

        citers_a, citers_b = c.citer_set(citing), c.citer_set(cited)
        both = len(citers_a & citers_b)
        # the link's own endpoints are not co-citers of the pair
        union = len((citers_a | citers_b) - {citing, cited})
        put("cocite_count", both)
        put("cocite_jaccard", both / union if union else 0.0)
        put("bibcoupling_count", len(c.ref_set(citing) & c.ref_set(cited)))

        a, b = aligned_series(self.series(cited), self.series(citing))
        put("xcorr_lag0", lagged_correlation(a, b, 0))
        put("xcorr_lagYd", lagged_correlation(a, b, year_diff) if abs(year_diff) < len(a) else 0.0)
        put("xcorr_max", max(lagged_correlation(a, b, lag) for lag in range(-MAX_LAG, MAX_LAG + 1)))

        ctx = c.contexts.get((citing, cited))
        if ctx is None:
            for name in FEATURE_GROUPS["content"]:
                mask[FEATURE_INDEX[name]] = False
        else:
            occ = ctx.occurrences
            put("content_similarity", self.content_similarity(citing, cited))
            put("cite_occurrences", len(occ))
            for name, pat in _SECTION_PATTERNS.items():
                put(name, sum(1 for o in occ if pat.search(o.section_name.lower())))
            put("pos_paper", float(np.mean([o.rel_pos_paper for o in occ])))
            put("pos_section", float(np.mean([o.rel_pos_section for o in occ])))
            put("pos_subsection", float(np.mean([o.rel_pos_subsection for o in occ])))
            put("pos_sentence", float(np.mean([o.rel_pos_sentence for o in occ])))
            text = " ".join(o.sentence_text.lower() for o in occ)
            put("lex_extension", float(bool(_LEX_EXTENSION.search(text))))
            put("lex_ourprevious", float(bool(_LEX_PREVIOUS.search(text))))
        return EdgeFeatureVector(citing, cited, values, mask)


_extractors: "weakref.WeakKeyDictionary[Corpus, EdgeFeatureExtractor]" = weakref.WeakKeyDictionary()


def extractor_for(corpus: Corpus) -> EdgeFeatureExtractor:
    ex = _extractors.get(corpus)
    if ex is None:
        ex = _extractors[corpus] = EdgeFeatureExtractor(corpus)
    return ex


def extract_features(corpus: Corpus, citing: str, cited: str) -> EdgeFeatureVector:
    return extractor_for(corpus).extract(citing, cited)


def export_edge_features(path, vectors) -> None:
    write_jsonl(path, (fv.to_json() for fv in vectors))


def stack(vectors: list[EdgeFeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and the shared mask; raises if masks differ."""
    if not vectors:
        raise ValueError("no feature vectors")
    mask = vectors[0].mask
    for fv in vectors[1:]:
        if not np.array_equal(fv.mask, mask):
            raise ValueError("feature vectors do not share one availability mask")
    return np.vstack([fv.values for fv in vectors]), mask.copy()
