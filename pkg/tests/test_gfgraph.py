import math
from dataclasses import replace

import numpy as np
import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geneticflow.corpus import PaperRecord, TopicRecord
from geneticflow.gfgraph import (
    GFProfile,
    ProfileError,
    build_full_profile,
    export_dot,
    extract_core_profile,
    populate_contributions,
    topological_order,
    top_edges,
)
from geneticflow.topic_embed import embed_corpus_topics

from conftest import make_corpus


def populated(profile, p_cont=1.0, p_extend=None):
    for n in profile.nodes.values():
        n.p_cont = p_cont if not callable(p_cont) else p_cont(n.paper_id)
    probs = {(e.dst, e.src): (0.5 if p_extend is None else p_extend(e)) for e in profile.edges}
    return profile.with_extend(probs)


def test_single_self_citation():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s")], [("B", "A")])
    p = build_full_profile(c, "s")
    assert p.edge_pairs() == {("A", "B")}
    assert set(p.nodes) == {"A", "B"}


def test_future_dated_citation_dropped():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s")], [("A", "B")])
    p = build_full_profile(c, "s")
    assert p.edges == [] and p.dropped_future == 1


def test_same_year_cycle_broken_lexicographically():
    c = make_corpus([("A", 2010, "s"), ("B", 2010, "s"), ("C", 2010, "s")], [("B", "A"), ("C", "B"), ("A", "C")])
    p = build_full_profile(c, "s")
    # cycle edges (A,B), (B,C), (C,A); the largest pair (C,A) goes
    assert p.edge_pairs() == {("A", "B"), ("B", "C")}
    assert p.dropped_cycle == 1


def test_only_scholar_papers_and_attributes():
    c = make_corpus(
        [("A", 2010, "xs"), ("B", 2012, "s"), ("X", 2011, "o"), ("Y", 2013, "o")],
        [("B", "A"), ("X", "A"), ("Y", "B"), ("B", "X")],
    )
    p = build_full_profile(c, "s")
    assert set(p.nodes) == {"A", "B"}
    assert p.edge_pairs() == {("A", "B")}
    assert p.nodes["A"].author_order == 2 and p.nodes["A"].citation_count == 2
    assert p.nodes["B"].author_order == 1 and p.nodes["B"].citation_count == 1


def test_errors():
    c = make_corpus([("A", 2010, "s")])
    with pytest.raises(ProfileError):
        build_full_profile(c, "nobody")
    p = build_full_profile(c, "s")
    with pytest.raises(ProfileError, match="p_cont"):
        extract_core_profile(p)
    populated(p)
    with pytest.raises(ValueError):
        extract_core_profile(p, edge_fraction=0.0)


def test_twenty_paper_scholar_brute_force():
    rng = np.random.default_rng(3)
    papers = [(f"s{i}", int(rng.integers(2000, 2010)), "s") for i in range(20)]
    papers += [(f"o{i}", int(rng.integers(2000, 2010)), "o") for i in range(10)]
    ids = [p[0] for p in papers]
    cits = {(ids[a], ids[b]) for a, b in rng.integers(0, 30, size=(150, 2)) if a != b}
    c = make_corpus(papers, sorted(cits))
    year = {p[0]: p[1] for p in papers}
    p = build_full_profile(c, "s")
    assert len(p) == 20
    own = {i for i in ids if i.startswith("s")}
    strict = [(d, s) for s, d in cits if s in own and d in own and year[s] > year[d]]
    same = [(d, s) for s, d in cits if s in own and d in own and year[s] == year[d]]
    assert len(p.edges) == len(strict) + len(same) - p.dropped_cycle
    assert set(strict) <= p.edge_pairs()
    assert p.dropped_future == sum(1 for s, d in cits if s in own and d in own and year[s] < year[d])


def test_core_identity_when_all_contribute():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s"), ("C", 2013, "s")], [("B", "A"), ("C", "A")])
    p = populated(build_full_profile(c, "s"))
    core = extract_core_profile(p, 0.5, 1.0)
    assert set(core.nodes) == set(p.nodes) and core.edge_pairs() == p.edge_pairs()


def test_core_drops_low_contribution_node():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s"), ("C", 2013, "s")], [("B", "A"), ("C", "B"), ("C", "A")])
    p = populated(build_full_profile(c, "s"), p_cont=lambda pid: 0.4 if pid == "B" else 0.9)
    core = extract_core_profile(p, 0.5, 1.0)
    assert set(core.nodes) == {"A", "C"}
    assert core.edge_pairs() == {("A", "C")}


def test_core_half_of_ten_edges():
    papers = [(f"p{i}", 2000 + i, "s") for i in range(6)]
    pairs = [(f"p{j}", f"p{i}") for i in range(5) for j in range(i + 1, 6)][:10]
    c = make_corpus(papers, pairs)
    rng = np.random.default_rng(0)
    scores = {e: float(x) for e, x in zip(sorted(pairs), rng.random(10))}
    p = populated(build_full_profile(c, "s"), p_extend=lambda e: scores[(e.dst, e.src)])
    core = extract_core_profile(p, 0.5, 0.5)
    expected = sorted(scores, key=scores.get, reverse=True)[:5]
    assert core.edge_pairs() == {(cited, citing) for citing, cited in expected}


def test_edge_fraction_uses_ceiling_and_ties():
    papers = [(f"p{i}", 2000 + i, "s") for i in range(4)]
    c = make_corpus(papers, [("p1", "p0"), ("p2", "p0"), ("p3", "p0")])
    p = populated(build_full_profile(c, "s"))
    core = extract_core_profile(p, 0.5, 0.5)
    # ceil(1.5) = 2 edges, all tied at 0.5, so smallest (src, dst) ids win
    assert core.edge_pairs() == {("p0", "p1"), ("p0", "p2")}
    assert len(top_edges(p, 0.34).edges) == 2


def test_populate_contributions_uses_authorship():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "xys")])
    p = populate_contributions(build_full_profile(c, "s"), c, lambda a, b, t: 0.0)
    assert p.nodes["A"].p_cont == 1.0
    assert p.nodes["B"].p_cont == pytest.approx(1 / 3)


def test_json_roundtrip(tmp_path):
    c = make_corpus(
        [PaperRecord("A", "t", 2010, ("s",), topic_ids=("x",)), ("B", 2012, "s")],
        [("B", "A")],
        topics=[TopicRecord("r", None), TopicRecord("x", "r")],
    )
    p = populated(build_full_profile(c, "s", embed_corpus_topics(c, 1)))
    p.save(tmp_path / "p.json")
    q = GFProfile.load(tmp_path / "p.json")
    assert q.edges == p.edges and set(q.nodes) == set(p.nodes)
    for pid in p.nodes:
        np.testing.assert_array_equal(q.nodes[pid].topic_vector, p.nodes[pid].topic_vector)
        assert q.nodes[pid].p_cont == p.nodes[pid].p_cont


def parse_dot(text):
    graphs = pydot.graph_from_dot_data(text)
    assert graphs and len(graphs) == 1
    return graphs[0]


def test_dot_two_nodes_one_edge(tmp_path):
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s")], [("B", "A")])
    p = build_full_profile(c, "s")
    out = export_dot(p, tmp_path / "p.dot")
    g = parse_dot(open(out).read())
    assert len([n for n in g.get_nodes() if n.get_name().strip('"') in {"A", "B"}]) == 2
    assert len(g.get_edges()) == 1
    labels = {n.get_name().strip('"'): n.get_label() for n in g.get_nodes()}
    assert labels["A"] == '"A:2010"'


def test_dot_nodes_only_and_odd_ids(tmp_path):
    c = make_corpus([('we"ird id', 2010, "s"), ("B-2", 2012, "s")])
    g = parse_dot(open(export_dot(build_full_profile(c, "s"), tmp_path / "p.dot")).read())
    assert len(g.get_edges()) == 0
    assert len([n for n in g.get_nodes() if n.get_name() not in ("node", "edge", "graph")]) == 2


def test_dot_unwritable_path(tmp_path):
    c = make_corpus([("A", 2010, "s")])
    with pytest.raises(OSError):
        export_dot(build_full_profile(c, "s"), tmp_path / "missing" / "p.dot")


@st.composite
def scholar_corpora(draw):
    n = draw(st.integers(1, 12))
    papers = [(f"p{i}", draw(st.integers(2000, 2004)), "s") for i in range(n)]
    cits = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
    cits = sorted({(f"p{a}", f"p{b}") for a, b in cits if a != b})
    return make_corpus(papers, cits)


@settings(max_examples=150, deadline=None)
@given(scholar_corpora(), st.data())
def test_profiles_are_dags_and_core_is_idempotent(c, data):
    p = build_full_profile(c, "s")
    assert topological_order(p.nodes, p.edge_pairs()) is not None
    for e in p.edges:
        assert p.nodes[e.src].year <= p.nodes[e.dst].year
    conts = data.draw(st.lists(st.floats(0, 1), min_size=len(p), max_size=len(p)))
    exts = data.draw(st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]), min_size=len(p.edges), max_size=len(p.edges)))
    p = populated(p, p_cont=dict(zip(p.nodes, conts)).get, p_extend=lambda e: exts[p.edges.index(e)])
    q = data.draw(st.sampled_from([0.1, 0.3, 0.5, 1.0]))
    core = extract_core_profile(p, 0.5, q)
    assert set(core.nodes) <= set(p.nodes) and core.edge_pairs() <= p.edge_pairs()
    for e in core.edges:
        assert e.src in core.nodes and e.dst in core.nodes
    surviving = [e for e in p.edges if e.src in core.nodes and e.dst in core.nodes]
    assert len(core.edges) == math.ceil(q * len(surviving) - 1e-12)
    again = extract_core_profile(core, 0.5, q)
    assert set(again.nodes) == set(core.nodes) and again.edges == core.edges
    assert topological_order(core.nodes, core.edge_pairs()) is not None


def test_with_extend_requires_every_edge():
    c = make_corpus([("A", 2010, "s"), ("B", 2012, "s")], [("B", "A")])
    p = build_full_profile(c, "s")
    with pytest.raises(KeyError):
        p.with_extend({})
    assert replace(p).edge_pairs() == p.edge_pairs()
