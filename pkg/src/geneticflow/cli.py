"""``gf`` command line: corpus ingestion, profiling, training, evaluation."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .corpus import (
    AA_LABELS_FILE,
    AWARD_LABELS_FILE,
    EXTEND_LABELS_FILE,
    CorpusError,
    load_aa_labels,
    load_award_labels,
    load_corpus,
    load_extend_labels,
    save_corpus,
)
from .gfgraph import ATTRIBUTES, GFProfile, ProfileError, build_full_profile, export_dot, extract_core_profile, populate_contributions

EXIT_OK = 0
EXIT_INVALID = 2


def _seed(args) -> int:
    env = os.environ.get("GF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"GF_SEED must be an integer, got {env!r}") from None
    return args.seed


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _labels_path(args, attr: str, default_name: str) -> Path:
    p = getattr(args, attr, None)
    return Path(p) if p else Path(args.corpus) / default_name


def _eval_config(args):
    from .edge_profile.forest import ForestConfig
    from .harness.evaluation import EvalConfig
    from .represent import GNNConfig

    seed = _seed(args)
    return EvalConfig(
        folds=args.folds,
        repeats=args.repeats,
        n_pos=args.n_pos,
        n_neg=args.n_neg,
        seed=seed,
        edge_fraction=getattr(args, "q", 1.0),
        node_threshold=args.node_threshold,
        selection=tuple(_names(args.mask)),
        threshold_on=args.threshold_on,
        gnn=GNNConfig(hidden=args.hidden, layers=args.layers, epochs=args.epochs, lr=args.lr, seed=seed),
        forest=ForestConfig(n_trees=args.trees, seed=seed),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus, strict=not args.lenient)
    rep = corpus.report
    summary = {
        "papers": rep.papers,
        "citations": rep.citations,
        "contexts": len(corpus.contexts),
        "topics": len(corpus.topics),
        "authors": len(corpus.author_papers),
        "dropped_dangling": rep.dropped_dangling,
        "dropped_self": rep.dropped_self,
        "dropped_duplicate": rep.dropped_duplicate,
        "dropped_contexts": rep.dropped_contexts,
    }
    print(json.dumps(summary, indent=1))
    if args.out:
        save_corpus(corpus, args.out)
    return EXIT_OK


def _extend_probs(corpus, profile: GFProfile, model) -> dict:
    from .edge_profile.features import extractor_for

    ex = extractor_for(corpus)
    probs = {}
    for e in profile.edges:
        fv = ex.extract(e.dst, e.src)
        model.check_mask(fv.mask)
        probs[(e.dst, e.src)] = float(model.predict_matrix(np.where(model.feature_mask, fv.values, -1.0))[0])
    return probs


def cmd_build_profiles(args) -> int:
    from .edge_profile.forest import ExtendModel
    from .node_profile import AAConfig, AADetector
    from .topic_embed import TopicEmbedding, embed_corpus_topics

    corpus = load_corpus(args.corpus, strict=not args.lenient)
    if args.scholars:
        scholars = _names(args.scholars)
    else:
        scholars = sorted(load_award_labels(_labels_path(args, "labels", AWARD_LABELS_FILE)))
    emb = embed_corpus_topics(corpus, args.topic_dim, seed=_seed(args)) if corpus.topics else TopicEmbedding.empty(0)
    model = ExtendModel.load(args.extend_model) if args.extend_model else None
    det = AADetector(corpus, AAConfig())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if emb.vectors:
        emb.save(out / "topic_embedding.jsonl")
    for s in scholars:
        prof = build_full_profile(corpus, s, emb)
        populate_contributions(prof, corpus, det)
        if model is not None:
            prof = prof.with_extend(_extend_probs(corpus, prof, model))
        if args.core:
            if model is None:
                raise ValueError("--core needs --extend-model for edge ranking")
            prof = extract_core_profile(prof, args.node_threshold, args.q)
        prof.save(out / f"profile_{s}.json")
        if args.dot:
            export_dot(prof, out / f"profile_{s}.dot")
    print(f"wrote {len(scholars)} profile(s) to {out}")
    return EXIT_OK


def cmd_aa(args) -> int:
    from .node_profile import AAConfig, AADetector, alpha_bias_test, evaluate_aa_labels, export_aa_scores

    corpus = load_corpus(args.corpus, strict=not args.lenient)
    if args.alpha_test:
        res = alpha_bias_test(corpus, list(corpus.papers), threshold=args.alpha_threshold)
        print(json.dumps(vars(res), indent=1))
    det = AADetector(corpus, AAConfig(s_len=args.s_len, s_adr=args.s_adr, boundary=args.boundary))
    labels = load_aa_labels(_labels_path(args, "labels", AA_LABELS_FILE))
    for lab in labels:
        det.score(lab.advisor_id, lab.advisee_id, lab.year)
    print(json.dumps(evaluate_aa_labels(det, labels), indent=1))
    if args.out:
        export_aa_scores(args.out, det.scores())
    return EXIT_OK


def cmd_edges(args) -> int:
    from .edge_profile.features import export_edge_features, extractor_for
    from .edge_profile.forest import ForestConfig, cross_validate_classifier, train_extend_classifier

    corpus = load_corpus(args.corpus, strict=not args.lenient)
    labels = load_extend_labels(_labels_path(args, "labels", EXTEND_LABELS_FILE))
    if args.mode == "no-content" and "content" not in _names(args.exclude):
        args.exclude = ",".join(_names(args.exclude) + ["content"])
    if not labels:
        raise ValueError("no labeled citations")
    ex = extractor_for(corpus)
    vectors = [ex.extract(c, d) for c, d in sorted(labels)]
    mask = np.logical_and.reduce([fv.mask for fv in vectors])
    vectors = [fv.restrict(mask) for fv in vectors]
    data = [(fv, labels[(fv.citing_id, fv.cited_id)]) for fv in vectors]
    if args.features_out:
        export_edge_features(args.features_out, vectors)
    cfg = ForestConfig(n_trees=args.trees, seed=_seed(args))
    if args.cv:
        rep = cross_validate_classifier(data, cfg, args.folds, args.repeats, tuple(_names(args.exclude)))
        print(rep.summary())
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                json.dump(rep.to_json(), fh, indent=1)
    if args.exclude:
        from .edge_profile.features import group_mask

        data = [(fv.restrict(group_mask(tuple(_names(args.exclude)))), y) for fv, y in data]
    model = train_extend_classifier(data, cfg)
    if args.out:
        model.save(args.out)
        print(f"wrote extend model to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .represent import GNNConfig, encode_node_features, save_model, train_gnn
    from .topic_embed import TopicEmbedding, embed_corpus_topics

    corpus = load_corpus(args.corpus, strict=not args.lenient)
    labels = load_award_labels(_labels_path(args, "labels", AWARD_LABELS_FILE))
    seed = _seed(args)
    emb = embed_corpus_topics(corpus, args.topic_dim, seed=seed) if corpus.topics else TopicEmbedding.empty(0)
    selection = tuple(_names(args.mask))
    scholars = sorted(s for s in labels if corpus.has_author(s))
    profiles = [build_full_profile(corpus, s, emb) for s in scholars]
    enc = [encode_node_features(p, selection) for p in profiles]
    cfg = GNNConfig(hidden=args.hidden, layers=args.layers, epochs=args.epochs, lr=args.lr, seed=seed)
    params, run = train_gnn(profiles, enc, [labels[s] for s in scholars], cfg)
    save_model(args.out, params, cfg, {"selection": list(selection), "seed": seed, "losses": run.losses, "final": run.final_metrics})
    print(f"trained on {len(scholars)} scholars: final loss {run.final_metrics['loss']:.4f}, train F1 {run.final_metrics['train_f1']:.3f}")
    return EXIT_OK


def _study(args):
    from .harness.evaluation import AwardStudy

    corpus = load_corpus(args.corpus, strict=not args.lenient)
    labels = load_award_labels(_labels_path(args, "labels", AWARD_LABELS_FILE))
    ext_path = _labels_path(args, "extend_labels", EXTEND_LABELS_FILE)
    ext = load_extend_labels(ext_path) if ext_path.exists() else {}
    return AwardStudy(corpus, labels, _eval_config(args), ext)


def cmd_eval(args) -> int:
    from .harness.evaluation import METHODS, compare_methods, write_report

    methods = _names(args.method)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    study = _study(args)
    reports = {}
    for m in methods:
        reports[m] = study.evaluate(m)
        print(reports[m].summary())
    paired = compare_methods(reports, methods[0])
    for p in paired:
        print(f"{p['a']} vs {p['b']}: mean dF1 {p['mean_diff']:+.3f}, p={p['p_value']:.3g}")
    write_report(args.out, reports, study.cfg, paired)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness.evaluation import run_edge_sweep, write_sweep_csv

    fractions = _floats(args.fractions)
    study = _study(args)
    rows = run_edge_sweep(study.corpus, study.labels, fractions, study.cfg, views=tuple(_names(args.views)), study=study)
    for r in rows:
        print(f"{r.view:5s} q={r.q:<4g} F1 {r.f1_mean:.3f}±{r.f1_std:.3f}  AUC {r.auc_mean:.3f}")
    write_sweep_csv(args.out, rows)
    return EXIT_OK


def cmd_synth(args) -> int:
    from .harness.synth import SynthSpec, generate_synthetic_corpus

    spec = SynthSpec(
        n_scholars=args.scholars,
        awardee_fraction=args.awardee_fraction,
        n_aa_pairs=args.aa_pairs,
        n_external_papers=args.external,
        seed=_seed(args),
    )
    res = generate_synthetic_corpus(spec)
    out = res.write(args.out)
    print(f"wrote {res.corpus!r} with labels to {out}")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    if args.profile:
        prof = GFProfile.load(args.profile)
    else:
        if not (args.corpus and args.scholar):
            raise ValueError("give --profile, or --corpus with --scholar")
        prof = build_full_profile(load_corpus(args.corpus, strict=not args.lenient), args.scholar)
    export_dot(prof, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_corpus(p, required=True):
    p.add_argument("--corpus", required=required, help="corpus directory")
    p.add_argument("--lenient", action="store_true", help="drop dangling/self-loop citations instead of failing")


def _add_gnn(p):
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--mask", default=",".join(ATTRIBUTES), help="node attributes to use")
    p.add_argument("--topic-dim", type=int, default=8)


def _add_eval(p):
    _add_gnn(p)
    p.add_argument("--labels", help="award label file (default: <corpus>/labels_award.jsonl)")
    p.add_argument("--extend-labels", help="extend label file (default: <corpus>/labels_extend.jsonl)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--n-pos", type=int, default=50)
    p.add_argument("--n-neg", type=int, default=150)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--node-threshold", type=float, default=0.5)
    p.add_argument("--threshold-on", choices=("train", "test"), default="train")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gf", description=__doc__)
    ap.add_argument("--seed", type=int, default=0, help="master seed (GF_SEED overrides)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and print a summary")
    _add_corpus(p)
    p.add_argument("--out", help="write the normalised corpus here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-profiles", help="write GF profiles as JSON")
    _add_corpus(p)
    p.add_argument("--out", required=True)
    p.add_argument("--scholars", help="comma-separated author ids (default: all award-labeled)")
    p.add_argument("--labels")
    p.add_argument("--extend-model", help="extend model JSON for edge probabilities")
    p.add_argument("--core", action="store_true", help="write core views")
    p.add_argument("--dot", action="store_true", help="also write DOT files")
    p.add_argument("--node-threshold", type=float, default=0.5)
    p.add_argument("--q", type=float, default=1.0, help="edge fraction for core views")
    p.add_argument("--topic-dim", type=int, default=8)
    p.set_defaults(func=cmd_build_profiles)

    p = sub.add_parser("aa", help="score labeled advisor-advisee pairs")
    _add_corpus(p)
    p.add_argument("--labels")
    p.add_argument("--out", help="write scores as JSONL")
    p.add_argument("--s-len", type=int, default=2)
    p.add_argument("--s-adr", type=float, default=1.5)
    p.add_argument("--boundary", type=float, default=0.5)
    p.add_argument("--alpha-test", action="store_true", help="also run the alphabetical-order test")
    p.add_argument("--alpha-threshold", type=float, default=0.13)
    p.set_defaults(func=cmd_aa)

    p = sub.add_parser("edges", help="extract citation features and train the extend classifier")
    _add_corpus(p)
    p.add_argument("--labels", "--train", dest="labels", help="extend label file")
    p.add_argument("--mode", choices=("full", "no-content"), default="full", help="no-content drops context features")
    p.add_argument("--out", help="extend model JSON")
    p.add_argument("--features-out", help="edge_features.jsonl")
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--cv", action="store_true", help="run repeated stratified cross-validation")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--exclude", default="", help="feature groups to ablate")
    p.add_argument("--report", help="CV report JSON")
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("train", help="train the GNN on all labeled scholars")
    _add_corpus(p)
    _add_gnn(p)
    p.add_argument("--labels")
    p.add_argument("--out", default="gnn_model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="cross-validated award inference")
    _add_corpus(p)
    _add_eval(p)
    p.add_argument("--method", default="gf-full", help="comma-separated: gf-full,gf-core,cc,bc,ca,indicators")
    p.add_argument("--q", type=float, default=1.0, help="edge fraction for GF methods")
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="award inference with top-q edges")
    _add_corpus(p)
    _add_eval(p)
    p.add_argument("--fractions", default="1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1")
    p.add_argument("--views", default="full", help="full,core")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic corpus with label files")
    p.add_argument("--out", required=True)
    p.add_argument("--scholars", type=int, default=200)
    p.add_argument("--awardee-fraction", type=float, default=0.25)
    p.add_argument("--aa-pairs", type=int, default=30)
    p.add_argument("--external", type=int, default=2000, help="external citing papers")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-dot", help="render a profile as Graphviz DOT")
    _add_corpus(p, required=False)
    p.add_argument("--profile", help="profile JSON")
    p.add_argument("--scholar")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, CorpusError, ProfileError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"gf {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
