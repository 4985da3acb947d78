import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geneticflow.corpus import (
    AALabel,
    CitationContextRecord,
    CorpusError,
    Occurrence,
    PaperRecord,
    citation_time_series,
    load_aa_labels,
    load_award_labels,
    load_corpus,
    load_extend_labels,
    save_corpus,
    shared_author_count,
    write_aa_labels,
    write_award_labels,
    write_extend_labels,
)

from conftest import make_corpus


def write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def test_citation_counts_three_papers():
    c = make_corpus([("A", 2000, "a"), ("B", 2001, "b"), ("C", 2002, "c")], [("B", "A"), ("C", "B")])
    assert {p: c.citation_count(p) for p in "ABC"} == {"A": 1, "B": 1, "C": 0}
    c = make_corpus([("A", 2000, "a"), ("B", 2001, "b"), ("C", 2002, "c")], [("A", "B"), ("A", "C")])
    assert {p: c.citation_count(p) for p in "ABC"} == {"A": 0, "B": 1, "C": 1}


def test_lenient_drops_dangling_and_counts():
    c = make_corpus([("A", 2000, "a"), ("B", 2001, "b")], [("B", "A"), ("B", "Z")], strict=False)
    assert c.report.dropped == 1
    assert c.report.dropped_dangling == 1
    assert len(c.citations) == 1


def test_strict_rejects_dangling_and_self_loop():
    with pytest.raises(CorpusError, match="Z"):
        make_corpus([("A", 2000, "a")], [("A", "Z")])
    with pytest.raises(CorpusError, match="self-loop"):
        make_corpus([("A", 2000, "a")], [("A", "A")])
    c = make_corpus([("A", 2000, "a")], [("A", "A")], strict=False)
    assert c.report.dropped_self == 1


def test_duplicate_citation_deduplicated():
    c = make_corpus([("A", 2000, "a"), ("B", 2001, "b")], [("B", "A"), ("B", "A")])
    assert c.citation_count("A") == 1
    assert c.report.dropped_duplicate == 1


def test_paper_validation():
    with pytest.raises(CorpusError, match="no authors"):
        make_corpus([("A", 2000, ())])
    with pytest.raises(CorpusError, match="twice"):
        make_corpus([("A", 2000, ("a", "a"))])
    with pytest.raises(CorpusError, match="year"):
        make_corpus([("A", 1850, "a")])
    with pytest.raises(CorpusError, match="duplicate paper_id 'A'"):
        make_corpus([("A", 2000, "a"), ("A", 2001, "b")])


def test_load_duplicate_paper_id_names_it(tmp_path):
    write_lines(tmp_path / "papers.jsonl", [
        {"paper_id": "X1", "title": "t", "year": 2000, "authors": ["a"]},
        {"paper_id": "X1", "title": "t", "year": 2001, "authors": ["b"]},
    ])
    with pytest.raises(CorpusError, match="X1"):
        load_corpus(tmp_path)


def test_load_malformed_line_reports_line_number(tmp_path):
    (tmp_path / "papers.jsonl").write_text(
        '{"paper_id": "A", "title": "t", "year": 2000, "authors": ["a"]}\n{not json\n', encoding="utf-8"
    )
    with pytest.raises(CorpusError, match=r"papers.jsonl:2"):
        load_corpus(tmp_path)


def test_load_missing_field_and_missing_dir(tmp_path):
    write_lines(tmp_path / "papers.jsonl", [{"paper_id": "A", "title": "t", "authors": ["a"]}])
    with pytest.raises(CorpusError, match="year"):
        load_corpus(tmp_path)
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nope")


def test_external_citation_override():
    c = make_corpus([PaperRecord("A", "t", 2000, ("a",), external_citations=42), ("B", 2001, "b")], [("B", "A")])
    assert c.citation_count("A") == 42
    assert c.in_corpus_citations("A") == 1


def test_citation_time_series_grouping():
    c = make_corpus(
        [("X", 2000, "a"), ("P", 2010, "b"), ("Q", 2010, "c"), ("R", 2012, "d"), ("U", 2001, "e")],
        [("P", "X"), ("Q", "X"), ("R", "X")],
    )
    assert citation_time_series(c, "X") == {2010: 2, 2012: 1}
    assert citation_time_series(c, "U") == {}
    with pytest.raises(KeyError):
        citation_time_series(c, "nope")


def test_shared_author_count():
    c = make_corpus([("A", 2000, "abc"), ("B", 2001, "bcd"), ("C", 2002, "xy"), ("D", 2003, "vwxyz"), ("E", 2004, "vwxyz")])
    assert shared_author_count(c, "A", "B") == 2
    assert shared_author_count(c, "A", "C") == 0
    assert shared_author_count(c, "D", "E") == 5
    with pytest.raises(KeyError):
        shared_author_count(c, "A", "nope")


@st.composite
def random_corpora(draw):
    n = draw(st.integers(1, 15))
    papers = []
    for i in range(n):
        authors = draw(st.lists(st.sampled_from("abcdefg"), min_size=1, max_size=4, unique=True))
        papers.append((f"p{i}", draw(st.integers(1990, 2020)), authors))
    cits = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
    cits = [(f"p{a}", f"p{b}") for a, b in cits if a != b]
    return papers, cits


@settings(max_examples=60, deadline=None)
@given(random_corpora())
def test_index_invariants(data):
    papers, cits = data
    c = make_corpus(papers, cits)
    distinct = set(cits)
    for pid in c.papers:
        n = sum(1 for _, cited in distinct if cited == pid)
        assert c.citation_count(pid) == n
        assert sum(citation_time_series(c, pid).values()) == n
    for a, ids in c.author_papers.items():
        for pid in c.papers:
            assert (pid in ids) == (a in c.papers[pid].authors)


@settings(max_examples=25, deadline=None)
@given(random_corpora())
def test_save_load_roundtrip(tmp_path_factory, data):
    papers, cits = data
    c = make_corpus(papers, cits, names={"a": "Alpha, A"})
    out = tmp_path_factory.mktemp("rt")
    save_corpus(c, out)
    c2 = load_corpus(out)
    assert c2.papers == c.papers
    assert set(c2.citations) == set(c.citations)
    assert c2.refs == c.refs and c2.citers == c.citers
    assert c2.author_papers == c.author_papers
    assert c2.author_names == c.author_names


def test_context_validation_and_roundtrip(tmp_path):
    occ = Occurrence("Method", 0.5, 0.2, 0.1, 0.9, "we extend it")
    c = make_corpus([("A", 2000, "a"), ("B", 2001, "a")], [("B", "A")], contexts=[CitationContextRecord("B", "A", (occ,))])
    save_corpus(c, tmp_path)
    assert load_corpus(tmp_path).contexts == c.contexts
    with pytest.raises(CorpusError):
        make_corpus([("A", 2000, "a"), ("B", 2001, "a")], [("B", "A")], contexts=[CitationContextRecord("B", "A", ())])
    bad = Occurrence("Method", 1.5, 0.2, 0.1, 0.9)
    with pytest.raises(CorpusError, match="outside"):
        make_corpus([("A", 2000, "a"), ("B", 2001, "a")], [("B", "A")], contexts=[CitationContextRecord("B", "A", (bad,))])


def test_label_files_roundtrip(tmp_path):
    write_award_labels(tmp_path / "aw.jsonl", {"s1": 1, "s2": 0})
    assert load_award_labels(tmp_path / "aw.jsonl") == {"s1": 1, "s2": 0}
    aa = [AALabel("x", "y", 2001, 1), AALabel("y", "x", 2001, 0)]
    write_aa_labels(tmp_path / "aa.jsonl", aa)
    assert load_aa_labels(tmp_path / "aa.jsonl") == aa
    ext = {("B", "A"): 1, ("C", "A"): 0}
    write_extend_labels(tmp_path / "ex.jsonl", ext)
    assert load_extend_labels(tmp_path / "ex.jsonl") == ext
    write_lines(tmp_path / "bad.jsonl", [{"author_id": "s", "awarded": 3}])
    with pytest.raises(CorpusError, match="0 or 1"):
        load_award_labels(tmp_path / "bad.jsonl")
