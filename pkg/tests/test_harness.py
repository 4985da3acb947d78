import csv
import filecmp
import json

import numpy as np
import pytest

from geneticflow import cli
from geneticflow.edge_profile import ForestConfig
from geneticflow.harness.evaluation import (
    AwardStudy,
    EvalConfig,
    FoldAudit,
    LeakageError,
    audit_fold,
    compare_methods,
    run_award_inference,
    run_edge_sweep,
    sample_scholars,
    write_report,
    write_sweep_csv,
)
from geneticflow.harness.synth import SynthSpec, generate_synthetic_corpus
from geneticflow.node_profile import AADetector, evaluate_aa_labels
from geneticflow.represent import GNNConfig


def small_cfg(**kw):
    base = dict(
        folds=3,
        repeats=1,
        n_pos=6,
        n_neg=12,
        seed=4,
        gnn=GNNConfig(hidden=8, epochs=8, lr=0.02),
        forest=ForestConfig(n_trees=5),
    )
    base.update(kw)
    return EvalConfig(**base)


@pytest.fixture(scope="module")
def study(synth_small):
    return AwardStudy(synth_small.corpus, synth_small.award_labels, small_cfg(), synth_small.extend_labels)


def test_synth_is_byte_identical(tmp_path):
    spec = SynthSpec(n_scholars=30, n_aa_pairs=5, n_aa_negatives=9, n_external_papers=100, seed=3)
    a = generate_synthetic_corpus(spec).write(tmp_path / "a")
    b = generate_synthetic_corpus(spec).write(tmp_path / "b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors and len(match) == len(names)
    other = SynthSpec(n_scholars=30, n_aa_pairs=5, n_aa_negatives=9, n_external_papers=100, seed=4)
    c = generate_synthetic_corpus(other).write(tmp_path / "c")
    assert (a / "papers.jsonl").read_bytes() != (c / "papers.jsonl").read_bytes()


def test_planted_pairs_are_labeled_and_recovered(synth_small):
    pos = [lab for lab in synth_small.aa_labels if lab.label]
    assert len(pos) == 10
    assert len(synth_small.aa_labels) == 10 + 30
    det = AADetector(synth_small.corpus)
    res = evaluate_aa_labels(det, synth_small.aa_labels)
    assert res["recall"] >= 0.95 and res["precision"] >= 0.95


def test_award_labels_cover_scholars(synth_small):
    labels = synth_small.award_labels
    assert set(labels) == set(synth_small.scholars)
    assert sum(labels.values()) == round(0.25 * 60)


def test_infeasible_spec_rejected():
    with pytest.raises(ValueError):
        generate_synthetic_corpus(SynthSpec(n_scholars=10, n_aa_pairs=20))
    with pytest.raises(ValueError):
        generate_synthetic_corpus(SynthSpec(awardee_fraction=1.5))


def test_sample_scholars(synth_small):
    cfg = small_cfg()
    chosen, y = sample_scholars(synth_small.corpus, synth_small.award_labels, cfg)
    assert len(chosen) == 18 and y.sum() == 6
    assert chosen == sorted(chosen)
    again, _ = sample_scholars(synth_small.corpus, synth_small.award_labels, cfg)
    assert again == chosen
    with pytest.raises(ValueError, match="required"):
        sample_scholars(synth_small.corpus, synth_small.award_labels, small_cfg(n_pos=100))


def test_single_class_labels_rejected(synth_small):
    neg = {s: 0 for s in synth_small.award_labels}
    with pytest.raises(ValueError, match="both classes"):
        run_award_inference(synth_small.corpus, neg, "gf-full", small_cfg())
    with pytest.raises(ValueError, match="both classes"):
        run_award_inference(synth_small.corpus, {}, "gf-full", small_cfg())


def test_config_validation():
    for bad in (dict(folds=1), dict(repeats=0), dict(n_pos=0), dict(edge_fraction=0.0), dict(threshold_on="x")):
        with pytest.raises(ValueError):
            small_cfg(**bad).validate()


def test_sweep_rejects_bad_fractions(synth_small, study):
    with pytest.raises(ValueError, match="empty"):
        run_edge_sweep(synth_small.corpus, synth_small.award_labels, [], study=study)
    for q in (0.0, 1.5, -0.2):
        with pytest.raises(ValueError, match="outside"):
            run_edge_sweep(synth_small.corpus, synth_small.award_labels, [1.0, q], study=study)
    with pytest.raises(ValueError, match="unknown method"):
        study.evaluate("pagerank")


def test_full_sweep_row_equals_plain_inference(synth_small):
    c, labels, ext = synth_small.corpus, synth_small.award_labels, synth_small.extend_labels
    plain = run_award_inference(c, labels, "gf-full", small_cfg(), ext)
    rows = run_edge_sweep(c, labels, [1.0], small_cfg(), ext)
    assert len(rows) == 1 and rows[0].q == 1.0
    assert (rows[0].f1_mean, rows[0].f1_std) == plain.f1
    assert (rows[0].auc_mean, rows[0].auc_std) == plain.auc


def test_evaluation_is_reproducible(synth_small):
    c, labels, ext = synth_small.corpus, synth_small.award_labels, synth_small.extend_labels
    a = AwardStudy(c, labels, small_cfg(), ext).evaluate("gf-full", 0.5)
    b = AwardStudy(c, labels, small_cfg(), ext).evaluate("gf-full", 0.5)
    assert np.array_equal(a.fold_f1, b.fold_f1) and np.array_equal(a.fold_auc, b.fold_auc)


def test_every_method_runs_and_audits_clean(study):
    for method in ("gf-full", "gf-core", "cc", "bc", "ca", "indicators"):
        rep = study.evaluate(method)
        assert rep.fold_f1.shape == (1, 3)
        assert np.all((rep.fold_auc >= 0) & (rep.fold_auc <= 1))
    study.evaluate("gf-full", 0.3)
    study.evaluate("gf-core", 0.3)
    assert study.audits
    for a in study.audits:
        audit_fold(a)
        assert not a.gnn_train_scholars & a.test_scholars


def test_extend_training_excludes_test_papers(study):
    for f in range(3):
        study.extend_probabilities(0, f)
    extend_audits = [a for a in study.audits if a.extend_train_citations]
    assert len(extend_audits) == 3
    for a in extend_audits:
        assert a.test_papers
        for citing, cited in a.extend_train_citations:
            assert citing not in a.test_papers and cited not in a.test_papers


def test_audit_detects_planted_overlap():
    clean = FoldAudit(0, 1, frozenset({"s1"}), frozenset({"p1"}), frozenset({"s2"}), frozenset({("p2", "p3")}))
    audit_fold(clean)
    with pytest.raises(LeakageError, match="GNN"):
        audit_fold(FoldAudit(0, 1, frozenset({"s1"}), frozenset(), gnn_train_scholars=frozenset({"s1", "s2"})))
    with pytest.raises(LeakageError, match="extend"):
        audit_fold(FoldAudit(0, 1, frozenset({"s1"}), frozenset({"p1"}), extend_train_citations=frozenset({("p2", "p1")})))


class LeakyGNNStudy(AwardStudy):
    def _gnn_training_indices(self, test):
        return np.arange(len(test))


class LeakyExtendStudy(AwardStudy):
    def _extend_training_citations(self, test_papers):
        return sorted(self.extend_labels)


def test_leakage_canary_trips_in_pipeline(synth_small):
    c, labels, ext = synth_small.corpus, synth_small.award_labels, synth_small.extend_labels
    with pytest.raises(LeakageError, match="GNN"):
        LeakyGNNStudy(c, labels, small_cfg(), ext).evaluate("gf-full")
    with pytest.raises(LeakageError, match="extend"):
        LeakyExtendStudy(c, labels, small_cfg(), ext).evaluate("gf-full", 0.5)


def test_report_and_sweep_files(tmp_path, study):
    reports = {m: study.evaluate(m) for m in ("gf-full", "indicators")}
    paired = compare_methods(reports)
    assert len(paired) == 1 and paired[0]["a"] == "gf-full"
    write_report(tmp_path / "r.json", reports, study.cfg, paired)
    obj = json.loads((tmp_path / "r.json").read_text())
    assert set(obj["methods"]) == {"gf-full", "indicators"}
    assert obj["config"]["folds"] == 3
    assert obj["methods"]["gf-full"]["fold_f1"] == reports["gf-full"].fold_f1.tolist()
    rows = run_edge_sweep(study.corpus, study.labels, [1.0, 0.5], views=("full", "core"), study=study)
    write_sweep_csv(tmp_path / "s.csv", rows)
    with open(tmp_path / "s.csv") as fh:
        table = list(csv.DictReader(fh))
    assert [(r["view"], r["q"]) for r in table] == [("full", "1"), ("full", "0.5"), ("core", "1"), ("core", "0.5")]


# -- command line -------------------------------------------------------------


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "corpus"
    assert cli.main(["synth", "--out", str(out), "--scholars", "40", "--aa-pairs", "6", "--external", "150"]) == 0
    return out


def test_cli_ingest_and_aa(corpus_dir, capsys):
    assert cli.main(["ingest", "--corpus", str(corpus_dir)]) == 0
    assert cli.main(["aa", "--corpus", str(corpus_dir), "--alpha-test"]) == 0
    out = capsys.readouterr().out
    assert '"precision"' in out and '"bias"' in out


def test_cli_pipeline(corpus_dir, tmp_path):
    d = str(corpus_dir)
    model = tmp_path / "extend.json"
    assert cli.main(["edges", "--corpus", d, "--trees", "5", "--out", str(model)]) == 0
    assert cli.main(["build-profiles", "--corpus", d, "--out", str(tmp_path / "prof"), "--extend-model", str(model), "--core", "--dot"]) == 0
    prof = sorted((tmp_path / "prof").glob("*.json"))
    assert prof
    assert cli.main(["export-dot", "--profile", str(prof[0]), "--out", str(tmp_path / "g.dot")]) == 0
    assert (tmp_path / "g.dot").read_text().startswith("digraph")
    assert cli.main(["train", "--corpus", d, "--epochs", "3", "--hidden", "4", "--out", str(tmp_path / "gnn.json")]) == 0
    common = ["--corpus", d, "--folds", "3", "--repeats", "1", "--n-pos", "4", "--n-neg", "8", "--epochs", "3", "--hidden", "4", "--trees", "5"]
    assert cli.main(["eval", *common, "--method", "gf-full,indicators", "--out", str(tmp_path / "r.json")]) == 0
    assert cli.main(["sweep", *common, "--fractions", "1.0,0.5", "--out", str(tmp_path / "s.csv")]) == 0
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 3


def test_cli_validation_failures_exit_2(corpus_dir, tmp_path, capsys):
    d = str(corpus_dir)
    assert cli.main(["ingest", "--corpus", str(tmp_path / "missing")]) == 2
    assert cli.main(["eval", "--corpus", d, "--method", "pagerank"]) == 2
    assert cli.main(["sweep", "--corpus", d, "--fractions", "0", "--n-pos", "4", "--n-neg", "8"]) == 2
    assert cli.main(["export-dot", "--out", str(tmp_path / "x.dot")]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_gf_seed_override(tmp_path, monkeypatch):
    args = ["--scholars", "20", "--aa-pairs", "3", "--external", "40"]
    monkeypatch.setenv("GF_SEED", "17")
    assert cli.main(["--seed", "1", "synth", "--out", str(tmp_path / "env"), *args]) == 0
    monkeypatch.delenv("GF_SEED")
    assert cli.main(["--seed", "17", "synth", "--out", str(tmp_path / "flag"), *args]) == 0
    assert cli.main(["--seed", "1", "synth", "--out", str(tmp_path / "one"), *args]) == 0
    same = (tmp_path / "env" / "papers.jsonl").read_bytes() == (tmp_path / "flag" / "papers.jsonl").read_bytes()
    diff = (tmp_path / "env" / "papers.jsonl").read_bytes() != (tmp_path / "one" / "papers.jsonl").read_bytes()
    assert same and diff
    monkeypatch.setenv("GF_SEED", "abc")
    assert cli.main(["synth", "--out", str(tmp_path / "bad"), *args]) == 2
