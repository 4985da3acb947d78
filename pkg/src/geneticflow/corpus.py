"""Bibliographic corpus: records, line-delimited JSON I/O and citation indexes."""

from __future__ import annotations

import datetime
import json
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

logger = logging.getLogger(__name__)

MIN_YEAR = 1900

PAPERS_FILE = "papers.jsonl"
CITATIONS_FILE = "citations.jsonl"
CONTEXTS_FILE = "contexts.jsonl"
TOPICS_FILE = "topics.jsonl"
AUTHORS_FILE = "authors.jsonl"
AWARD_LABELS_FILE = "labels_award.jsonl"
AA_LABELS_FILE = "labels_aa.jsonl"
EXTEND_LABELS_FILE = "labels_extend.jsonl"


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    year: int
    authors: tuple[str, ...]
    venue: str = ""
    topic_ids: tuple[str, ...] = ()
    abstract: str = ""
    external_citations: int | None = None

    def author_rank(self, author_id: str) -> int:
        """1-based position of ``author_id`` in the author list, 0 if absent."""
        try:
            return self.authors.index(author_id) + 1
        except ValueError:
            return 0

    def to_json(self) -> dict:
        out = {
            "paper_id": self.paper_id,
            "title": self.title,
            "year": self.year,
            "venue": self.venue,
            "authors": list(self.authors),
            "topic_ids": list(self.topic_ids),
        }
        if self.abstract:
            out["abstract"] = self.abstract
        if self.external_citations is not None:
            out["external_citations"] = self.external_citations
        return out


@dataclass(frozen=True)
class CitationRecord:
    citing_id: str
    cited_id: str


@dataclass(frozen=True)
class Occurrence:
    section_name: str
    rel_pos_paper: float
    rel_pos_section: float
    rel_pos_subsection: float
    rel_pos_sentence: float
    sentence_text: str = ""


@dataclass(frozen=True)
class CitationContextRecord:
    citing_id: str
    cited_id: str
    occurrences: tuple[Occurrence, ...]

    def to_json(self) -> dict:
        return {
            "citing_id": self.citing_id,
            "cited_id": self.cited_id,
            "occurrences": [vars(o) for o in self.occurrences],
        }


@dataclass(frozen=True)
class TopicRecord:
    topic_id: str
    parent_id: str | None = None
    name: str = ""


@dataclass
class LoadReport:
    papers: int = 0
    citations: int = 0
    dropped_dangling: int = 0
    dropped_self: int = 0
    dropped_duplicate: int = 0
    dropped_contexts: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_dangling + self.dropped_self + self.dropped_duplicate


class Corpus:
    """Immutable, fully indexed collection of papers and citations.

    ``refs[p]`` lists the papers cited by ``p``; ``citers[p]`` the papers citing
    ``p``. Citation counts are in-corpus unless a paper carries an
    ``external_citations`` override.
    """

    def __init__(
        self,
        papers: Iterable[PaperRecord],
        citations: Iterable[CitationRecord] = (),
        contexts: Iterable[CitationContextRecord] = (),
        topics: Iterable[TopicRecord] = (),
        author_names: Mapping[str, str] | None = None,
        strict: bool = True,
    ):
        self.report = LoadReport()
        self.papers: dict[str, PaperRecord] = {}
        for p in papers:
            if p.paper_id in self.papers:
                raise CorpusError(f"duplicate paper_id {p.paper_id!r}")
            _validate_paper(p)
            self.papers[p.paper_id] = p
        self.report.papers = len(self.papers)

        seen: set[tuple[str, str]] = set()
        kept: list[CitationRecord] = []
        for c in citations:
            key = (c.citing_id, c.cited_id)
            if c.citing_id == c.cited_id:
                if strict:
                    raise CorpusError(f"self-loop citation on {c.citing_id!r}")
                self.report.dropped_self += 1
                continue
            missing = [i for i in key if i not in self.papers]
            if missing:
                if strict:
                    raise CorpusError(f"dangling citation {key}: unknown {missing[0]!r}")
                self.report.dropped_dangling += 1
                continue
            if key in seen:
                self.report.dropped_duplicate += 1
                continue
            seen.add(key)
            kept.append(c)
        self.citations: tuple[CitationRecord, ...] = tuple(kept)
        self.report.citations = len(kept)

        refs: dict[str, list[str]] = defaultdict(list)
        citers: dict[str, list[str]] = defaultdict(list)
        for c in kept:
            refs[c.citing_id].append(c.cited_id)
            citers[c.cited_id].append(c.citing_id)
        self.refs: dict[str, tuple[str, ...]] = {k: tuple(sorted(v)) for k, v in refs.items()}
        self.citers: dict[str, tuple[str, ...]] = {k: tuple(sorted(v)) for k, v in citers.items()}
        self._ref_sets = {k: frozenset(v) for k, v in self.refs.items()}
        self._citer_sets = {k: frozenset(v) for k, v in self.citers.items()}

        self.contexts: dict[tuple[str, str], CitationContextRecord] = {}
        for ctx in contexts:
            key = (ctx.citing_id, ctx.cited_id)
            if key not in seen:
                if strict:
                    raise CorpusError(f"context for unknown citation {key}")
                self.report.dropped_contexts += 1
                continue
            _validate_context(ctx)
            self.contexts[key] = ctx

        self.topics: dict[str, TopicRecord] = {t.topic_id: t for t in topics}
        self.author_names: dict[str, str] = dict(author_names or {})

        author_papers: dict[str, list[str]] = defaultdict(list)
        for p in self.papers.values():
            for a in p.authors:
                author_papers[a].append(p.paper_id)
        self.author_papers: dict[str, tuple[str, ...]] = {
            a: tuple(sorted(ps, key=lambda i: (self.papers[i].year, i)))
            for a, ps in author_papers.items()
        }

    def __repr__(self) -> str:
        return (
            f"Corpus(papers={len(self.papers)}, citations={len(self.citations)}, "
            f"contexts={len(self.contexts)}, authors={len(self.author_papers)})"
        )

    def paper(self, paper_id: str) -> PaperRecord:
        try:
            return self.papers[paper_id]
        except KeyError:
            raise KeyError(f"unknown paper_id {paper_id!r}") from None

    def has_citation(self, citing_id: str, cited_id: str) -> bool:
        return cited_id in self._ref_sets.get(citing_id, ())

    def ref_set(self, paper_id: str) -> frozenset[str]:
        return self._ref_sets.get(paper_id, frozenset())

    def citer_set(self, paper_id: str) -> frozenset[str]:
        return self._citer_sets.get(paper_id, frozenset())

    def in_corpus_citations(self, paper_id: str) -> int:
        return len(self.citers.get(paper_id, ()))

    def citation_count(self, paper_id: str) -> int:
        p = self.paper(paper_id)
        if p.external_citations is not None:
            return p.external_citations
        return self.in_corpus_citations(paper_id)

    def papers_of(self, author_id: str) -> tuple[str, ...]:
        if author_id not in self.author_papers:
            raise KeyError(f"unknown author {author_id!r}")
        return self.author_papers[author_id]

    def has_author(self, author_id: str) -> bool:
        return author_id in self.author_papers

    @property
    def authors(self) -> list[str]:
        return sorted(self.author_papers)


def _validate_paper(p: PaperRecord) -> None:
    if not p.authors:
        raise CorpusError(f"paper {p.paper_id!r} has no authors")
    if len(set(p.authors)) != len(p.authors):
        raise CorpusError(f"paper {p.paper_id!r} lists an author twice")
    this_year = datetime.date.today().year
    if not MIN_YEAR <= p.year <= this_year:
        raise CorpusError(f"paper {p.paper_id!r} has year {p.year} outside [{MIN_YEAR}, {this_year}]")
    if p.external_citations is not None and p.external_citations < 0:
        raise CorpusError(f"paper {p.paper_id!r} has negative external_citations")


def _validate_context(ctx: CitationContextRecord) -> None:
    if not ctx.occurrences:
        raise CorpusError(f"context {ctx.citing_id}->{ctx.cited_id} has no occurrences")
    for o in ctx.occurrences:
        for v in (o.rel_pos_paper, o.rel_pos_section, o.rel_pos_subsection, o.rel_pos_sentence):
            if not 0.0 <= v <= 1.0:
                raise CorpusError(f"context {ctx.citing_id}->{ctx.cited_id}: position {v} outside [0, 1]")


def citation_time_series(corpus: Corpus, paper_id: str) -> dict[int, int]:
    """Number of citing papers per publication year of the citer."""
    corpus.paper(paper_id)
    counts = Counter(corpus.papers[c].year for c in corpus.citers.get(paper_id, ()))
    return dict(sorted(counts.items()))


def shared_author_count(corpus: Corpus, p1: str, p2: str) -> int:
    return len(set(corpus.paper(p1).authors) & set(corpus.paper(p2).authors))


# ---------------------------------------------------------------------------
# line-delimited JSON I/O
# ---------------------------------------------------------------------------


def read_jsonl(path: str | os.PathLike) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, object)``; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def write_jsonl(path: str | os.PathLike, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def _field(obj: dict, name: str, where: str):
    try:
        return obj[name]
    except KeyError:
        raise CorpusError(f"{where}: missing field {name!r}") from None


def _parse_paper(obj: dict, where: str) -> PaperRecord:
    try:
        ext = obj.get("external_citations")
        return PaperRecord(
            paper_id=str(_field(obj, "paper_id", where)),
            title=str(obj.get("title", "")),
            year=int(_field(obj, "year", where)),
            authors=tuple(str(a) for a in _field(obj, "authors", where)),
            venue=str(obj.get("venue") or ""),
            topic_ids=tuple(str(t) for t in obj.get("topic_ids") or ()),
            abstract=str(obj.get("abstract") or ""),
            external_citations=None if ext is None else int(ext),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, CorpusError):
            raise
        raise CorpusError(f"{where}: bad value ({e})") from None


def _parse_context(obj: dict, where: str) -> CitationContextRecord:
    occ = []
    for o in _field(obj, "occurrences", where):
        try:
            occ.append(
                Occurrence(
                    section_name=str(o.get("section_name", "")),
                    rel_pos_paper=float(o.get("rel_pos_paper", 0.0)),
                    rel_pos_section=float(o.get("rel_pos_section", 0.0)),
                    rel_pos_subsection=float(o.get("rel_pos_subsection", 0.0)),
                    rel_pos_sentence=float(o.get("rel_pos_sentence", 0.0)),
                    sentence_text=str(o.get("sentence_text", "")),
                )
            )
        except (TypeError, ValueError, AttributeError) as e:
            raise CorpusError(f"{where}: bad occurrence ({e})") from None
    return CitationContextRecord(
        str(_field(obj, "citing_id", where)), str(_field(obj, "cited_id", where)), tuple(occ)
    )


def _resolve_paths(paths) -> dict[str, Path]:
    if isinstance(paths, (str, os.PathLike)):
        root = Path(paths)
        if not root.is_dir():
            raise FileNotFoundError(f"corpus directory not found: {root}")
        names = [PAPERS_FILE, CITATIONS_FILE, CONTEXTS_FILE, TOPICS_FILE, AUTHORS_FILE]
        return {n: root / n for n in names if (root / n).exists()}
    return {k: Path(v) for k, v in dict(paths).items()}


def load_corpus(paths, strict: bool = True) -> Corpus:
    """Load a corpus from a directory or a ``{file name: path}`` mapping.

    Only ``papers.jsonl`` is required. In lenient mode dangling and self-loop
    citations are dropped and counted in ``corpus.report``.
    """
    files = _resolve_paths(paths)
    if PAPERS_FILE not in files:
        raise CorpusError(f"{PAPERS_FILE} is required")
    for p in files.values():
        if not p.exists():
            raise FileNotFoundError(p)

    papers = []
    seen: set[str] = set()
    for lineno, obj in read_jsonl(files[PAPERS_FILE]):
        where = f"{files[PAPERS_FILE]}:{lineno}"
        rec = _parse_paper(obj, where)
        if rec.paper_id in seen:
            raise CorpusError(f"{where}: duplicate paper_id {rec.paper_id!r}")
        seen.add(rec.paper_id)
        papers.append(rec)

    citations = []
    if CITATIONS_FILE in files:
        for lineno, obj in read_jsonl(files[CITATIONS_FILE]):
            where = f"{files[CITATIONS_FILE]}:{lineno}"
            citations.append(
                CitationRecord(str(_field(obj, "citing_id", where)), str(_field(obj, "cited_id", where)))
            )

    contexts = []
    if CONTEXTS_FILE in files:
        for lineno, obj in read_jsonl(files[CONTEXTS_FILE]):
            contexts.append(_parse_context(obj, f"{files[CONTEXTS_FILE]}:{lineno}"))

    topics = []
    if TOPICS_FILE in files:
        for lineno, obj in read_jsonl(files[TOPICS_FILE]):
            where = f"{files[TOPICS_FILE]}:{lineno}"
            parent = obj.get("parent_id")
            topics.append(
                TopicRecord(str(_field(obj, "topic_id", where)), None if parent is None else str(parent), str(obj.get("name", "")))
            )

    names = {}
    if AUTHORS_FILE in files:
        for lineno, obj in read_jsonl(files[AUTHORS_FILE]):
            where = f"{files[AUTHORS_FILE]}:{lineno}"
            names[str(_field(obj, "author_id", where))] = str(_field(obj, "name", where))

    corpus = Corpus(papers, citations, contexts, topics, names, strict=strict)
    if corpus.report.dropped:
        logger.warning(
            "dropped %d citation(s): %d dangling, %d self-loop, %d duplicate",
            corpus.report.dropped,
            corpus.report.dropped_dangling,
            corpus.report.dropped_self,
            corpus.report.dropped_duplicate,
        )
    return corpus


def save_corpus(corpus: Corpus, directory: str | os.PathLike) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / PAPERS_FILE, (p.to_json() for p in corpus.papers.values()))
    write_jsonl(out / CITATIONS_FILE, ({"citing_id": c.citing_id, "cited_id": c.cited_id} for c in corpus.citations))
    if corpus.contexts:
        write_jsonl(out / CONTEXTS_FILE, (c.to_json() for c in corpus.contexts.values()))
    if corpus.topics:
        rows = []
        for t in corpus.topics.values():
            row = {"topic_id": t.topic_id, "name": t.name}
            if t.parent_id is not None:
                row["parent_id"] = t.parent_id
            rows.append(row)
        write_jsonl(out / TOPICS_FILE, rows)
    if corpus.author_names:
        write_jsonl(out / AUTHORS_FILE, ({"author_id": a, "name": n} for a, n in sorted(corpus.author_names.items())))
    return out


# ---------------------------------------------------------------------------
# label files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AALabel:
    advisor_id: str
    advisee_id: str
    year: int
    label: int


def _check_binary(v, where: str) -> int:
    v = int(v)
    if v not in (0, 1):
        raise CorpusError(f"{where}: label must be 0 or 1, got {v}")
    return v


def load_award_labels(path) -> dict[str, int]:
    out: dict[str, int] = {}
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        out[str(_field(obj, "author_id", where))] = _check_binary(_field(obj, "awarded", where), where)
    return out


def load_aa_labels(path) -> list[AALabel]:
    out = []
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        out.append(
            AALabel(
                str(_field(obj, "advisor_id", where)),
                str(_field(obj, "advisee_id", where)),
                int(_field(obj, "year", where)),
                _check_binary(_field(obj, "label", where), where),
            )
        )
    return out


def load_extend_labels(path) -> dict[tuple[str, str], int]:
    out: dict[tuple[str, str], int] = {}
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        key = (str(_field(obj, "citing_id", where)), str(_field(obj, "cited_id", where)))
        out[key] = _check_binary(_field(obj, "label", where), where)
    return out


def write_award_labels(path, labels: Mapping[str, int]) -> None:
    write_jsonl(path, ({"author_id": a, "awarded": int(v)} for a, v in labels.items()))


def write_aa_labels(path, labels: Iterable[AALabel]) -> None:
    write_jsonl(path, (vars(l) for l in labels))


def write_extend_labels(path, labels: Mapping[tuple[str, str], int]) -> None:
    write_jsonl(path, ({"citing_id": a, "cited_id": b, "label": int(v)} for (a, b), v in labels.items()))
