"""Seeded synthetic corpus with planted ground truth.

Scholars get scripted careers. Awardees differ from the others only in the
structure of their self-citations: a long run of consecutive papers linked by
extend-type citations, and those papers carry their highest citation
counts. Paper counts and citation-count distributions are drawn identically
for both groups, so scalar indicators carry no award signal.

Planted advisor-advisee pairs follow the mentorship pattern the detector
looks for: an established advisor (prior papers of their own) who sits
last on the advisee's first-author papers for several early-career years.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus import (
    AA_LABELS_FILE,
    AWARD_LABELS_FILE,
    EXTEND_LABELS_FILE,
    AALabel,
    CitationContextRecord,
    CitationRecord,
    Corpus,
    Occurrence,
    PaperRecord,
    TopicRecord,
    save_corpus,
    write_aa_labels,
    write_award_labels,
    write_extend_labels,
)

_SYLLABLES = ("ka", "lo", "mi", "ren", "sa", "to", "vi", "del", "ga", "hu", "jor", "ne", "pa", "ri", "su", "wen", "xi", "yo", "zan", "be")
_GENERIC = ("model", "analysis", "study", "approach", "framework", "data", "system", "method", "results", "evaluation")


@dataclass
class SynthSpec:
    n_scholars: int = 200
    awardee_fraction: float = 0.25
    n_aa_pairs: int = 30
    n_aa_negatives: int = 60
    papers_per_scholar: tuple[int, int] = (15, 30)
    chain_fraction_awardee: float = 0.5
    chain_fraction_other: float = 0.1
    random_selfcite_rate: float = 0.4
    extend_noise: float = 0.1
    n_external_papers: int = 2000
    first_year: int = 1970
    last_year: int = 2020
    seed: int = 0

    def validate(self) -> None:
        for name in ("awardee_fraction", "chain_fraction_awardee", "chain_fraction_other", "extend_noise"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.random_selfcite_rate < 0:
            raise ValueError("random_selfcite_rate must be >= 0")
        n_pos = round(self.awardee_fraction * self.n_scholars)
        if n_pos == 0 or n_pos == self.n_scholars:
            raise ValueError(f"infeasible spec: {n_pos} awardees among {self.n_scholars} scholars")
        if self.n_aa_pairs > self.n_scholars:
            raise ValueError("more planted pairs than scholars")
        lo, hi = self.papers_per_scholar
        if not 12 <= lo <= hi:
            raise ValueError("papers_per_scholar needs 12 <= low <= high")
        if self.last_year - self.first_year < 40:
            raise ValueError("year range too short for scripted careers")


@dataclass
class SynthResult:
    corpus: Corpus
    award_labels: dict[str, int]
    aa_labels: list[AALabel]
    extend_labels: dict[tuple[str, str], int]
    scholars: list[str] = field(default_factory=list)

    def write(self, directory) -> Path:
        out = save_corpus(self.corpus, directory)
        write_award_labels(out / AWARD_LABELS_FILE, self.award_labels)
        write_aa_labels(out / AA_LABELS_FILE, self.aa_labels)
        write_extend_labels(out / EXTEND_LABELS_FILE, self.extend_labels)
        return out


class _Builder:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = np.random.default_rng([spec.seed & 0xFFFFFFFF, 5])
        self.papers: dict[str, dict] = {}
        self.citations: list[tuple[str, str]] = []
        self.contexts: dict[tuple[str, str], tuple[Occurrence, ...]] = {}
        self.names: dict[str, str] = {}
        self.n_fillers = 0

    # -- naming -----------------------------------------------------------
    def name(self, author: str) -> None:
        rng = self.rng
        sur = "".join(rng.choice(_SYLLABLES, size=rng.integers(2, 4))).capitalize()
        given = "".join(rng.choice(_SYLLABLES, size=2)).capitalize()
        self.names[author] = f"{sur}, {given}"

    def filler(self) -> str:
        self.n_fillers += 1
        a = f"f{self.n_fillers:05d}"
        self.name(a)
        return a

    def add_paper(self, authors, year, words, topic, citations=None) -> str:
        pid = f"p{len(self.papers):06d}"
        self.papers[pid] = {
            "authors": tuple(authors),
            "year": int(year),
            "words": list(words),
            "topic": topic,
            "citations": citations,
        }
        return pid

    # -- text ---------------------------------------------------------------
    def words(self, vocab: list[str], k: int = 4) -> list[str]:
        return list(self.rng.choice(vocab, size=k, replace=False)) + list(self.rng.choice(_GENERIC, size=2, replace=False))

    def context(self, extend: bool) -> tuple[Occurrence, ...]:
        rng = self.rng
        if extend:
            n = int(rng.integers(1, 4))
            return tuple(
                Occurrence(
                    str(rng.choice(["Method", "Approach", "Experiments"])),
                    float(rng.uniform(0.3, 0.8)),
                    float(rng.uniform(0, 1)),
                    float(rng.uniform(0, 1)),
                    float(rng.uniform(0, 0.5)),
                    str(rng.choice(["This paper extends our previous work.", "We extend the model of our earlier work.", "Building on our previous system we add new components."])),
                )
                for _ in range(n)
            )
        return (
            Occurrence(
                str(rng.choice(["Introduction", "Related Work"])),
                float(rng.uniform(0.0, 0.3)),
                float(rng.uniform(0, 1)),
                float(rng.uniform(0, 1)),
                float(rng.uniform(0.3, 1.0)),
                str(rng.choice(["Several studies address this problem.", "See also related analyses.", "Prior work examined similar data."])),
            ),
        )


def _draw_citations(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.floor(np.exp(rng.normal(2.0, 1.1, size=n))).astype(int)


def generate_synthetic_corpus(spec: SynthSpec = SynthSpec()) -> SynthResult:
    spec.validate()
    b = _Builder(spec)
    rng = b.rng

    # topic hierarchy: root -> areas -> subtopics, each subtopic with a vocabulary
    topics = [TopicRecord("t", None, "root")]
    vocab: dict[str, list[str]] = {}
    subtopics_of: dict[str, list[str]] = {}
    for a in range(4):
        area = f"t{a}"
        topics.append(TopicRecord(area, "t", f"area {a}"))
        subtopics_of[area] = []
        for s in range(4):
            sub = f"t{a}{s}"
            topics.append(TopicRecord(sub, area, f"subtopic {a}.{s}"))
            subtopics_of[area].append(sub)
            vocab[sub] = [f"w{a}{s}{i}" for i in range(12)]

    n = spec.n_scholars
    n_pos = round(spec.awardee_fraction * n)
    scholars = [f"s{i:03d}" for i in range(n)]
    awarded = set(rng.choice(n, size=n_pos, replace=False).tolist())
    award_labels = {s: int(i in awarded) for i, s in enumerate(scholars)}
    for s in scholars:
        b.name(s)

    extend_labels: dict[tuple[str, str], int] = {}

    def cite(citing: str, cited: str, extend: bool) -> None:
        noisy = rng.random() < spec.extend_noise
        b.citations.append((citing, cited))
        b.contexts[(citing, cited)] = b.context(extend != noisy)
        extend_labels[(citing, cited)] = int(extend)

    own_papers: dict[str, list[str]] = {}
    careers: dict[str, tuple[int, int]] = {}
    lo_n, hi_n = spec.papers_per_scholar
    for i, s in enumerate(scholars):
        start = int(rng.integers(spec.first_year, spec.last_year - 35))
        end = min(spec.last_year, start + int(rng.integers(25, 36)))
        careers[s] = (start, end)
        n_papers = int(rng.integers(lo_n, hi_n + 1))
        years = np.sort(rng.integers(start, end + 1, size=n_papers))
        years[0] = start
        area = f"t{int(rng.integers(4))}"
        cits = _draw_citations(rng, n_papers)
        # chain: a run of consecutive papers linked by extend citations
        frac = spec.chain_fraction_awardee if i in awarded else spec.chain_fraction_other
        m = max(2, round(frac * n_papers))
        first = int(rng.integers(0, n_papers - m + 1))
        chain = list(range(first, first + m))
        if i in awarded:
            # the chain papers carry the scholar's highest citation counts
            order = np.argsort(-cits, kind="stable")
            assigned = np.empty(n_papers, dtype=int)
            rest = [j for j in range(n_papers) if j not in set(chain)]
            rng.shuffle(rest)
            for slot, j in enumerate(chain + rest):
                assigned[j] = cits[order[slot]]
            cits = assigned
        chain_sig = f"sig{s}"
        ids = []
        prev_coauthor = None
        for j in range(n_papers):
            sub = str(rng.choice(subtopics_of[area]))
            k = int(rng.integers(1, 5))
            coauthors = [b.filler() for _ in range(k - 1)]
            shared = None
            if j in chain and prev_coauthor is not None and coauthors and rng.random() < 0.5:
                # consecutive chain papers share one co-author pairwise
                shared = coauthors[0] = prev_coauthor
            u = rng.random()
            rank = 0 if u < 0.4 or k == 1 else (1 if u < 0.65 else k - 1)
            authors = coauthors[:]
            authors.insert(min(rank, len(authors)), s)
            words = b.words(vocab[sub])
            if j in chain:
                words.append(chain_sig)
                prev_coauthor = coauthors[-1] if coauthors and coauthors[-1] != shared else None
            ids.append(b.add_paper(authors, years[j], words, sub, int(cits[j])))
        own_papers[s] = ids
        for a, c in zip(chain[:-1], chain[1:]):
            cite(ids[c], ids[a], True)
        n_rand = round(spec.random_selfcite_rate * n_papers)
        chain_pairs = {(c, a) for a, c in zip(chain[:-1], chain[1:])}
        tried = 0
        made = 0
        while made < n_rand and tried < 20 * n_rand:
            tried += 1
            x, y = sorted(rng.choice(n_papers, size=2, replace=False).tolist())
            if (y, x) in chain_pairs or (ids[y], ids[x]) in extend_labels:
                continue
            cite(ids[y], ids[x], False)
            made += 1

    # planted advisor-advisee pairs
    aa_labels: list[AALabel] = []
    advisors = [scholars[i] for i in sorted(rng.choice(n, size=spec.n_aa_pairs, replace=False).tolist())]
    planted: list[tuple[str, str, int]] = []
    for k_pair, adv in enumerate(advisors):
        start, end = careers[adv]
        years = sorted(b.papers[p]["year"] for p in own_papers[adv])
        s0 = years[11] + 1  # advisor already has at least 12 papers
        length = int(rng.integers(4, 6))
        s0 = min(s0, spec.last_year - length - 4)
        student = f"u{k_pair:03d}"
        b.name(student)
        area_sub = b.papers[own_papers[adv][0]]["topic"]
        for y in range(s0, s0 + length):
            for _ in range(2):
                authors = [student] + ([b.filler()] if rng.random() < 0.5 else []) + [adv]
                pid = b.add_paper(authors, y, b.words(vocab[area_sub]), area_sub, int(_draw_citations(rng, 1)[0]))
                own_papers[adv].append(pid)
        for y in range(s0 + length, min(spec.last_year, s0 + length + 5) + 1):
            for _ in range(2):
                b.add_paper([student, b.filler()], y, b.words(vocab[area_sub]), area_sub)
        t = s0 + 1
        planted.append((adv, student, t))
        aa_labels.append(AALabel(adv, student, t, 1))

    # negatives: reversed pairs, senior peers, junior minor collaborators
    n_neg = spec.n_aa_negatives
    for adv, student, t in planted[: n_neg // 3]:
        aa_labels.append(AALabel(student, adv, t, 0))
    for k_neg in range(n_neg // 3):
        a, c = rng.choice(n, size=2, replace=False).tolist()
        peer, senior = scholars[a], scholars[c]
        y0 = max(careers[peer][0], careers[senior][0]) + 12
        sub = b.papers[own_papers[peer][0]]["topic"]
        for y in range(y0, y0 + 3):
            pid = b.add_paper([peer, b.filler(), senior], y, b.words(vocab[sub]), sub, int(_draw_citations(rng, 1)[0]))
            own_papers[peer].append(pid)
            own_papers[senior].append(pid)
        aa_labels.append(AALabel(senior, peer, y0 + 1, 0))
    for k_neg in range(n_neg - 2 * (n_neg // 3)):
        senior = scholars[int(rng.integers(n))]
        junior = f"j{k_neg:03d}"
        b.name(junior)
        y0 = careers[senior][0] + 10
        sub = b.papers[own_papers[senior][0]]["topic"]
        pid = b.add_paper([b.filler(), junior, senior], y0, b.words(vocab[sub]), sub, int(_draw_citations(rng, 1)[0]))
        own_papers[senior].append(pid)
        b.add_paper([junior, b.filler()], y0 + 1, b.words(vocab[sub]), sub)
        aa_labels.append(AALabel(senior, junior, y0, 0))

    # external citers: each cites several papers of one scholar
    for _ in range(spec.n_external_papers):
        s = scholars[int(rng.integers(n))]
        pool = own_papers[s]
        w = np.array([1.0 + (b.papers[p]["citations"] or 0) for p in pool])
        k = min(len(pool), int(rng.integers(2, 6)))
        picks = rng.choice(len(pool), size=k, replace=False, p=w / w.sum())
        year = min(spec.last_year, max(b.papers[pool[j]]["year"] for j in picks) + int(rng.integers(0, 4)))
        sub = b.papers[pool[int(picks[0])]]["topic"]
        pid = b.add_paper([b.filler() for _ in range(int(rng.integers(1, 4)))], year, b.words(vocab[sub]), sub)
        for j in sorted(picks.tolist()):
            b.citations.append((pid, pool[j]))

    papers = [
        PaperRecord(
            pid,
            " ".join(d["words"]),
            d["year"],
            d["authors"],
            venue="SynthConf",
            topic_ids=(d["topic"],),
            abstract=" ".join(d["words"][::-1]),
            external_citations=d["citations"],
        )
        for pid, d in b.papers.items()
    ]
    corpus = Corpus(
        papers,
        [CitationRecord(a, c) for a, c in b.citations],
        [CitationContextRecord(a, c, occ) for (a, c), occ in b.contexts.items()],
        topics,
        b.names,
    )
    return SynthResult(corpus, award_labels, aa_labels, extend_labels, scholars)


def separable_feature_set(n: int = 400, seed: int = 0, n_features: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix whose class is decided by one feature crossing 0."""
    rng = np.random.default_rng(seed)
    y = (np.arange(n) % 4 == 0).astype(int)
    X = rng.normal(size=(n, n_features))
    X[:, 2] = np.where(y == 1, rng.uniform(0.5, 2.0, n), rng.uniform(-2.0, -0.5, n))
    return X, y

