"""Scholar-centric self-citation graphs (full and core views) and their export."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus
from .topic_embed import TopicEmbedding, paper_topic_vector

logger = logging.getLogger(__name__)

ATTRIBUTES = ("citations", "date", "order", "topic")

# 4x4 grid over the first two topic components
PALETTE = (
    "#fde0dd", "#fa9fb5", "#dd3497", "#7a0177",
    "#e5f5e0", "#a1d99b", "#41ab5d", "#005a32",
    "#deebf7", "#9ecae1", "#4292c6", "#08306b",
    "#fff7bc", "#fec44f", "#ec7014", "#8c2d04",
)


class ProfileError(ValueError):
    pass


@dataclass
class GFNode:
    paper_id: str
    year: int
    citation_count: int
    author_order: int
    topic_vector: np.ndarray
    p_cont: float | None = None


@dataclass(frozen=True)
class GFEdge:
    src: str
    dst: str
    p_extend: float | None = None


@dataclass
class GFProfile:
    """Timed DAG of a scholar's papers; edge ``src -> dst`` means ``dst`` cites ``src``."""

    scholar_id: str
    nodes: dict[str, GFNode]
    edges: list[GFEdge]
    view: str = "full"
    attribute_selection: tuple[str, ...] = ATTRIBUTES
    dropped_future: int = 0
    dropped_cycle: int = 0
    edge_base: int | None = None
    kind: str = "gf"

    @property
    def node_ids(self) -> list[str]:
        return list(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        index = {p: i for i, p in enumerate(self.nodes)}
        src = np.fromiter((index[e.src] for e in self.edges), dtype=np.int64, count=len(self.edges))
        dst = np.fromiter((index[e.dst] for e in self.edges), dtype=np.int64, count=len(self.edges))
        return src, dst

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(e.src, e.dst) for e in self.edges}

    def with_extend(self, probs: Mapping[tuple[str, str], float]) -> "GFProfile":
        """Copy with ``p_extend`` set from ``probs[(citing, cited)]``."""
        edges = [replace(e, p_extend=float(probs[(e.dst, e.src)])) for e in self.edges]
        return replace(self, edges=edges)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "scholar_id": self.scholar_id,
            "view": self.view,
            "attribute_selection": list(self.attribute_selection),
            "dropped_future": self.dropped_future,
            "dropped_cycle": self.dropped_cycle,
            "edge_base": self.edge_base,
            "nodes": [
                {
                    "paper_id": n.paper_id,
                    "year": n.year,
                    "citation_count": n.citation_count,
                    "author_order": n.author_order,
                    "topic_vector": [float(x) for x in n.topic_vector],
                    "p_cont": n.p_cont,
                }
                for n in self.nodes.values()
            ],
            "edges": [{"src": e.src, "dst": e.dst, "p_extend": e.p_extend} for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GFProfile":
        nodes = {
            n["paper_id"]: GFNode(
                n["paper_id"],
                int(n["year"]),
                int(n["citation_count"]),
                int(n["author_order"]),
                np.asarray(n["topic_vector"], dtype=float),
                n.get("p_cont"),
            )
            for n in obj["nodes"]
        }
        edges = [GFEdge(e["src"], e["dst"], e.get("p_extend")) for e in obj["edges"]]
        return cls(
            obj["scholar_id"],
            nodes,
            edges,
            view=obj.get("view", "full"),
            attribute_selection=tuple(obj.get("attribute_selection", ATTRIBUTES)),
            dropped_future=obj.get("dropped_future", 0),
            dropped_cycle=obj.get("dropped_cycle", 0),
            edge_base=obj.get("edge_base"),
            kind=obj.get("kind", "gf"),
        )

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "GFProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def topological_order(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> list[str] | None:
    """Kahn's algorithm; ``None`` if the graph has a cycle."""
    nodes = list(nodes)
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}
    for s, d in edges:
        succ[s].append(d)
        indeg[d] += 1
    ready = sorted(n for n in nodes if indeg[n] == 0)
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return order if len(order) == len(nodes) else None


def _find_cycle(edges: list[tuple[str, str]]) -> list[tuple[str, str]] | None:
    succ: dict[str, list[str]] = {}
    for s, d in sorted(edges):
        succ.setdefault(s, []).append(d)
    color: dict[str, int] = {}
    for start in sorted(succ):
        if color.get(start):
            continue
        stack = [(start, iter(succ.get(start, ())))]
        path = [start]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                color[node] = 2
                continue
            c = color.get(nxt, 0)
            if c == 1:
                cyc = path[path.index(nxt):] + [nxt]
                return list(zip(cyc, cyc[1:]))
            if c == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return None


def _break_cycles(edges: list[tuple[str, str]]) -> tuple[list[tuple[str, str]], int]:
    """Drop the lexicographically largest edge of some cycle until acyclic."""
    edges = sorted(edges)
    dropped = 0
    while True:
        cyc = _find_cycle(edges)
        if cyc is None:
            return edges, dropped
        edges.remove(max(cyc))
        dropped += 1


def build_full_profile(
    corpus: Corpus,
    scholar: str,
    emb: TopicEmbedding | None = None,
) -> GFProfile:
    """All of a scholar's papers linked by reversed self-citations.

    Citations to a later-dated paper are dropped and counted; cycles among
    same-year papers are broken deterministically.
    """
    if not corpus.has_author(scholar):
        raise ProfileError(f"unknown author {scholar!r}")
    paper_ids = corpus.papers_of(scholar)
    if not paper_ids:
        raise ProfileError(f"scholar {scholar!r} has no papers")
    emb = emb if emb is not None else TopicEmbedding.empty(0)
    nodes = {}
    for pid in paper_ids:
        p = corpus.papers[pid]
        nodes[pid] = GFNode(
            pid,
            p.year,
            corpus.citation_count(pid),
            p.author_rank(scholar),
            paper_topic_vector(corpus, emb, pid),
        )
    own = set(paper_ids)
    forward: list[tuple[str, str]] = []
    same_year: list[tuple[str, str]] = []
    dropped_future = 0
    for citing in paper_ids:
        for cited in corpus.refs.get(citing, ()):
            if cited not in own:
                continue
            y_citing, y_cited = nodes[citing].year, nodes[cited].year
            if y_citing < y_cited:
                dropped_future += 1
            elif y_citing == y_cited:
                same_year.append((cited, citing))
            else:
                forward.append((cited, citing))
    if dropped_future:
        logger.info("scholar %s: dropped %d future-dated self-citation(s)", scholar, dropped_future)
    same_year, dropped_cycle = _break_cycles(same_year)
    pairs = sorted(forward + same_year, key=lambda e: (nodes[e[0]].year, nodes[e[1]].year, e))
    return GFProfile(
        scholar,
        nodes,
        [GFEdge(s, d) for s, d in pairs],
        dropped_future=dropped_future,
        dropped_cycle=dropped_cycle,
    )


def populate_contributions(profile: GFProfile, corpus: Corpus, aa) -> GFProfile:
    """Fill ``p_cont`` of every node in place using an advisor-advisee provider."""
    from .node_profile import author_contribution

    for node in profile.nodes.values():
        node.p_cont = author_contribution(corpus, node.paper_id, profile.scholar_id, aa)
    return profile


def extract_core_profile(profile: GFProfile, node_threshold: float = 0.5, edge_fraction: float = 1.0) -> GFProfile:
    """Keep nodes with ``p_cont > node_threshold`` and the top
    ``ceil(edge_fraction * m)`` surviving edges by ``p_extend``.

    ``m`` is the number of edges between retained nodes; for a profile that
    is already a core view it is the base count recorded at its extraction,
    which makes repeated extraction with the same parameters a no-op.
    """
    if not 0.0 < edge_fraction <= 1.0:
        raise ValueError(f"edge fraction {edge_fraction} outside (0, 1]")
    if any(n.p_cont is None for n in profile.nodes.values()):
        raise ProfileError("p_cont not populated")
    if any(e.p_extend is None for e in profile.edges):
        raise ProfileError("p_extend not populated")
    kept = {pid: replace(n) for pid, n in profile.nodes.items() if n.p_cont > node_threshold}
    surviving = [e for e in profile.edges if e.src in kept and e.dst in kept]
    base = len(surviving)
    if profile.view == "core" and profile.edge_base is not None and len(surviving) == len(profile.edges):
        base = profile.edge_base
    n_keep = min(len(surviving), math.ceil(edge_fraction * base - 1e-12))
    ranked = sorted(surviving, key=lambda e: (-e.p_extend, e.src, e.dst))[:n_keep]
    order = {(e.src, e.dst): i for i, e in enumerate(profile.edges)}
    ranked.sort(key=lambda e: order[(e.src, e.dst)])
    return replace(profile, nodes=kept, edges=ranked, view="core", edge_base=base)


def top_edges(profile: GFProfile, edge_fraction: float) -> GFProfile:
    """Full node set with only the top ``edge_fraction`` of edges by ``p_extend``."""
    if not 0.0 < edge_fraction <= 1.0:
        raise ValueError(f"edge fraction {edge_fraction} outside (0, 1]")
    if any(e.p_extend is None for e in profile.edges):
        raise ProfileError("p_extend not populated")
    n_keep = math.ceil(edge_fraction * len(profile.edges) - 1e-12)
    ranked = sorted(profile.edges, key=lambda e: (-e.p_extend, e.src, e.dst))[:n_keep]
    keep = {(e.src, e.dst) for e in ranked}
    return replace(profile, edges=[e for e in profile.edges if (e.src, e.dst) in keep])


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _bin(x: float, lo: float, hi: float, n: int = 4) -> int:
    if hi <= lo:
        return 0
    return min(n - 1, int((x - lo) / (hi - lo) * n))


def topic_color(vectors: list[np.ndarray]) -> list[str]:
    """Palette colour per vector from its first two components, binned over
    the range spanned by ``vectors``."""
    if not vectors:
        return []
    comps = np.zeros((len(vectors), 2))
    for i, v in enumerate(vectors):
        k = min(2, len(v))
        comps[i, :k] = v[:k]
    lo, hi = comps.min(axis=0), comps.max(axis=0)
    return [PALETTE[4 * _bin(a, lo[0], hi[0]) + _bin(b, lo[1], hi[1])] for a, b in comps]


def outline_width(citations: int) -> int:
    if citations < 10:
        return 1
    if citations < 100:
        return 2
    return 3


def edge_width(p_extend: float | None) -> float:
    return 1.0 if p_extend is None else round(0.5 + 3.5 * p_extend, 3)


def dot_source(profile: GFProfile) -> str:
    nodes = list(profile.nodes.values())
    colors = topic_color([n.topic_vector for n in nodes])
    lines = [f"digraph {_quote(profile.scholar_id)} {{", "  rankdir=TB;", "  node [style=filled, shape=ellipse];"]
    for n, color in zip(nodes, colors):
        lines.append(
            f"  {_quote(n.paper_id)} [label={_quote(f'{n.paper_id}:{n.year}')}, "
            f"fillcolor={_quote(color)}, penwidth={outline_width(n.citation_count)}];"
        )
    for e in profile.edges:
        lines.append(f"  {_quote(e.src)} -> {_quote(e.dst)} [penwidth={edge_width(e.p_extend)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(profile: GFProfile, out: str | os.PathLike) -> str:
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(dot_source(profile))
    return str(out)
