"""Topic-hierarchy embedding by classical multidimensional scaling."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus, TopicRecord, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

DEFAULT_DIM = 8
POWER_TOL = 1e-9
POWER_MAX_ITER = 10_000


class HierarchyError(ValueError):
    pass


@dataclass
class TopicHierarchy:
    nodes: list[str]
    parent: dict[str, str]
    root: str

    @classmethod
    def from_records(cls, records: Iterable[TopicRecord]) -> "TopicHierarchy":
        records = list(records)
        nodes = [r.topic_id for r in records]
        if len(set(nodes)) != len(nodes):
            raise HierarchyError("duplicate topic_id")
        known = set(nodes)
        parent = {}
        for r in records:
            if r.parent_id is None:
                continue
            if r.parent_id not in known:
                raise HierarchyError(f"topic {r.topic_id!r} has unknown parent {r.parent_id!r}")
            parent[r.topic_id] = r.parent_id
        roots = [n for n in nodes if n not in parent]
        if not roots:
            raise HierarchyError("topic hierarchy has no root (parent relation is cyclic)")
        h = cls(nodes, parent, roots[0])
        h._check_acyclic()
        return h

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], root: str) -> "TopicHierarchy":
        """Build from ``(child, parent)`` pairs."""
        parent = dict(edges)
        nodes = [root] + sorted((set(parent) | set(parent.values())) - {root})
        h = cls(nodes, parent, root)
        h._check_acyclic()
        return h

    def _check_acyclic(self) -> None:
        for start in self.parent:
            seen = {start}
            cur = start
            while cur in self.parent:
                cur = self.parent[cur]
                if cur in seen:
                    raise HierarchyError(f"cycle in parent relation through {cur!r}")
                seen.add(cur)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for child, par in self.parent.items():
            adj[child].append(par)
            adj[par].append(child)
        return adj

    def hop_distances(self) -> np.ndarray:
        """All-pairs unweighted shortest paths on the undirected hierarchy."""
        index = {n: i for i, n in enumerate(self.nodes)}
        adj = self.adjacency()
        n = len(self.nodes)
        dist = np.full((n, n), -1.0)
        for s in self.nodes:
            i = index[s]
            dist[i, i] = 0.0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if dist[i, index[v]] < 0:
                        dist[i, index[v]] = dist[i, index[u]] + 1
                        queue.append(v)
        if (dist < 0).any():
            raise HierarchyError("topic hierarchy is disconnected")
        return dist


@dataclass
class TopicEmbedding:
    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    eigenvalues: np.ndarray | None = None

    def __getitem__(self, topic_id: str) -> np.ndarray:
        return self.vectors[topic_id]

    def __contains__(self, topic_id: str) -> bool:
        return topic_id in self.vectors

    def save(self, path) -> None:
        write_jsonl(path, ({"topic_id": t, "vector": [float(x) for x in v]} for t, v in self.vectors.items()))

    @classmethod
    def load(cls, path) -> "TopicEmbedding":
        vectors = {str(o["topic_id"]): np.asarray(o["vector"], dtype=float) for _, o in read_jsonl(path)}
        dims = {len(v) for v in vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"inconsistent vector lengths {sorted(dims)} in {path}")
        return cls(dims.pop() if dims else 0, vectors)

    @classmethod
    def empty(cls, dim: int = DEFAULT_DIM) -> "TopicEmbedding":
        return cls(dim, {})


def top_eigenpairs(
    B: np.ndarray,
    k: int,
    seed: int = 0,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> tuple[np.ndarray, np.ndarray]:
    """Largest-algebraic ``k`` eigenpairs of symmetric ``B`` by power iteration.

    ``B`` is shifted by a Gershgorin bound so the spectrum is nonnegative and the
    dominant direction is the largest algebraic eigenvalue, then deflated after
    each pair. Eigenvector signs are fixed so the largest-magnitude entry is
    positive.
    """
    n = B.shape[0]
    shift = float(np.max(np.sum(np.abs(B), axis=1)))
    A = B + shift * np.eye(n)
    rng = np.random.default_rng(seed)
    values = np.zeros(k)
    vectors = np.zeros((n, k))
    for j in range(k):
        v = rng.standard_normal(n)
        v -= vectors[:, :j] @ (vectors[:, :j].T @ v)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = A @ v
            w -= vectors[:, :j] @ (vectors[:, :j].T @ w)
            lam = float(v @ w)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            w /= norm
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        else:
            logger.warning("power iteration did not converge for eigenpair %d", j)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        values[j] = lam - shift
        vectors[:, j] = v
        A = A - (lam * np.outer(v, v))
    return values, vectors


def classical_mds(hierarchy: TopicHierarchy, d: int = DEFAULT_DIM, seed: int = 0) -> TopicEmbedding:
    """Embed topics so Euclidean distances approximate hop distances.

    Coordinates are eigenvectors of the double-centered squared distance
    matrix scaled by the square root of their eigenvalue (negative
    eigenvalues give zero coordinates).
    """
    n = len(hierarchy.nodes)
    if not 1 <= d < n:
        raise ValueError(f"embedding dimension {d} out of range [1, {n - 1}]")
    D = hierarchy.hop_distances()
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D**2) @ J
    B = 0.5 * (B + B.T)
    values, vectors = top_eigenpairs(B, d, seed=seed)
    coords = vectors * np.sqrt(np.clip(values, 0.0, None))
    emb = {t: coords[i].copy() for i, t in enumerate(hierarchy.nodes)}
    return TopicEmbedding(d, emb, values)


def embed_corpus_topics(corpus: Corpus, d: int = DEFAULT_DIM, seed: int = 0) -> TopicEmbedding:
    """MDS embedding of the corpus topic file; empty embedding if there is none."""
    if not corpus.topics:
        return TopicEmbedding.empty(d)
    hierarchy = TopicHierarchy.from_records(corpus.topics.values())
    d = min(d, len(hierarchy.nodes) - 1)
    return classical_mds(hierarchy, d, seed=seed)


@dataclass
class TopicVectorStats:
    missing: int = 0


def paper_topic_vector(
    corpus: Corpus,
    emb: TopicEmbedding,
    paper_id: str,
    stats: TopicVectorStats | None = None,
) -> np.ndarray:
    """Mean embedding of a paper's topics; zero vector when none resolve."""
    paper = corpus.paper(paper_id)
    if not emb.vectors:
        # no embedding means no topic attribute, not a missing topic
        return np.zeros(emb.dim)
    vecs = []
    for t in paper.topic_ids:
        if t in emb:
            vecs.append(emb[t])
        else:
            logger.warning("topic %r of paper %r missing from embedding", t, paper_id)
            if stats is not None:
                stats.missing += 1
    if not vecs:
        return np.zeros(emb.dim)
    return np.mean(vecs, axis=0)


def topic_vectors(corpus: Corpus, emb: TopicEmbedding, paper_ids: Iterable[str]) -> Mapping[str, np.ndarray]:
    return {p: paper_topic_vector(corpus, emb, p) for p in paper_ids}
