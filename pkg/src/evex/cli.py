"""Batch command-line entry points for the whole pipeline.

Every stage reads and writes plain files (JSON / JSON Lines) so stages are
independently runnable and resumable; all randomized stages take an explicit
seed. Exit codes: 0 success, 1 usage, 2 validation (bad input data),
3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import distsup, service
from .corpus import load_corpus, load_split, save_split, split_documents
from .embeddings import SkipgramConfig, load_embeddings, save_embeddings, train_skipgram
from .errors import EvexError, ParseError, ValidationError
from .evaluation import (
    gold_argument_items,
    gold_trigger_items,
    leave_one_out,
    render_table,
    sample_for_audit,
    score_arguments,
    score_triggers,
    write_report,
)
from .expansion import Project, apply_decision, expand
from .models import (
    ARGUMENT,
    TRIGGER,
    CnnModel,
    TrainConfig,
    load_predictions,
    predict_arguments,
    predict_triggers,
    train,
    write_predictions,
)
from .rolemap import GENERIC_ROLES, RoleMapping, map_dataset, map_generic
from .wordnet import load_wordnet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _load_project(path: str) -> Project:
    if not Path(path).exists():
        raise ValidationError(f"project file not found: {path}")
    return Project.load(path)


def _load_grid(path: str | None, seed: int | None) -> TrainConfig:
    config = TrainConfig.from_file(path) if path else TrainConfig()
    if seed is not None:
        config.seed = seed
    return config


def _split_docs(args, part: str) -> set[str] | None:
    if not getattr(args, "split", None):
        return None
    split = load_split(args.split)
    return set(getattr(split, part))


def cmd_seed(args) -> None:
    path = Path(args.project)
    project = Project.load(path) if path.exists() else Project(name=path.stem)
    project.seed(args.type, [w for w in args.words.split(",") if w.strip()])
    project.save(path)
    print(f"{args.type}: {len(project.lexicons[args.type].candidates)} candidates")


def cmd_expand(args) -> None:
    project = _load_project(args.project)
    table = load_embeddings(args.embeddings) if args.embeddings else None
    db = load_wordnet(args.wordnet) if args.wordnet else None
    project.config = {"k": args.k, "min_sim": args.min_sim, "max_depth": args.depth}
    for event_type, lexicon in project.lexicons.items():
        if not lexicon.accepted_seeds():
            print(f"{event_type}: no accepted seeds, skipped")
            continue
        summary = expand(lexicon, table, db, k=args.k, min_sim=args.min_sim,
                         max_depth=args.depth)
        print(
            f"{event_type}: +{len(summary.added_embedding)} embedding, "
            f"+{len(summary.added_wordnet)} wordnet"
            + (f", oov={','.join(summary.oov_seeds)}" if summary.oov_seeds else "")
        )
    project.save(args.project)


def cmd_decision(args) -> None:
    project = _load_project(args.project)
    apply_decision(project, args.type, args.word, args.decision,
                   getattr(args, "target", None))
    project.save(args.project)
    print(f"{args.decision}: {args.word} ({args.type})")


def cmd_distsup(args) -> None:
    project = _load_project(args.project)
    corpus = load_corpus(args.corpus)
    lexicons = {t: ws for t, ws in project.final_trigger_sets().items() if ws}
    if not lexicons:
        raise ValidationError("no accepted triggers in any lexicon")
    positives = distsup.find_occurrences(corpus, lexicons, cap=args.cap)
    negatives = distsup.sample_negatives(
        corpus, lexicons, args.neg_ratio, args.seed, positives
    )
    distsup.write_examples(positives + negatives, args.out)
    counts: dict[str, int] = {}
    for ex in positives:
        counts[ex.label] = counts.get(ex.label, 0) + 1
    for label in sorted(counts):
        print(f"{label}: {counts[label]} positives")
    print(f"NONE: {len(negatives)} negatives")
    print(f"wrote {args.out}")


def cmd_adjudicate(args) -> None:
    examples = distsup.load_examples(args.examples)
    with open(args.judgments, encoding="utf-8") as fh:
        judgments = json.load(fh)
    kept = distsup.adjudicate(examples, judgments)
    distsup.write_examples(kept, args.out)
    print(f"kept {len(kept)} of {len(examples)} examples -> {args.out}")


def cmd_downsample(args) -> None:
    examples = distsup.load_examples(args.examples)
    kept = distsup.downsample_documents(examples, args.docs, args.seed)
    distsup.write_examples(kept, args.out)
    print(f"kept {len(kept)} examples in {args.docs} documents -> {args.out}")


def cmd_split(args) -> None:
    corpus = load_corpus(args.corpus)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    split = split_documents(corpus, ratios, args.seed)
    save_split(split, args.out)
    print(
        f"train={len(split.train)} dev={len(split.dev)} test={len(split.test)} "
        f"-> {args.out}"
    )


def _cmd_train(args, kind: str) -> None:
    examples = distsup.load_examples(args.examples)
    wanted_type = distsup.TriggerExample if kind == TRIGGER else distsup.ArgumentCandidate
    examples = [ex for ex in examples if isinstance(ex, wanted_type)]
    if not examples:
        raise ValidationError(f"no {kind} examples in {args.examples}")
    split = load_split(args.split)
    train_set = [ex for ex in examples if ex.doc_id in split.train]
    dev_set = [ex for ex in examples if ex.doc_id in split.dev]
    table = load_embeddings(args.embeddings) if args.embeddings else None
    grid = _load_grid(args.grid, args.seed)
    model, report = train(train_set, dev_set, grid, table, kind)
    model.save(args.out)
    for row in report["grid"]:
        marker = "*" if row.get("selected") else " "
        print(
            f"{marker} filters={row['filters']} batch={row['batch']} "
            f"w={row['pos_weight']} epochs={row['epochs']} dev_f1={row['dev_f1']:.4f}"
        )
    print(f"wrote {args.out}")


def cmd_map_roles(args) -> None:
    examples = distsup.load_examples(args.examples)
    candidates = [ex for ex in examples if isinstance(ex, distsup.ArgumentCandidate)]
    if len(candidates) != len(examples):
        raise ValidationError("map-roles expects a file of argument candidates")
    mapping = RoleMapping.from_file(args.mapping) if args.mapping else RoleMapping()
    mapped, distribution = map_dataset(candidates, mapping)
    distsup.write_examples(mapped, args.out)
    for label in sorted(distribution):
        print(f"{label}: {distribution[label]}")
    print(f"wrote {args.out}")


def cmd_predict(args) -> None:
    model = CnnModel.load(args.model)
    corpus = load_corpus(args.corpus)
    wanted = _split_docs(args, args.part) if args.split else None
    predictions = []
    trigger_index: dict[tuple[str, int], list] = {}
    if model.kind == ARGUMENT and args.triggers:
        for row in load_predictions(args.triggers):
            trigger_index.setdefault((row["doc_id"], row["sentence"]), []).append(row)
    for doc in corpus:
        if wanted is not None and doc.doc_id not in wanted:
            continue
        for sent_idx, sent in enumerate(doc.sentences):
            if model.kind == TRIGGER:
                predictions.extend(
                    predict_triggers(model, sent, doc.doc_id, sent_idx)
                )
            else:
                if args.triggers:
                    triggers = []
                    for row in trigger_index.get((doc.doc_id, sent_idx), []):
                        span = sent.token_span_for(row["s"], row["e"])
                        if span is None:
                            raise ValidationError(
                                f"predicted trigger ({row['s']},{row['e']}) not "
                                f"aligned to tokens of {doc.doc_id}:{sent_idx}"
                            )
                        triggers.append((span[0], span[1], row["label"]))
                else:
                    triggers = distsup.gold_trigger_spans(sent)
                if triggers and sent.mentions:
                    predictions.extend(
                        predict_arguments(model, sent, triggers, doc.doc_id, sent_idx)
                    )
    write_predictions(predictions, args.out)
    print(f"wrote {len(predictions)} predictions -> {args.out}")


def cmd_score(args) -> None:
    rows = load_predictions(args.pred)
    corpus = load_corpus(args.gold)
    wanted = _split_docs(args, args.part) if args.split else None
    if wanted is not None:
        rows = [r for r in rows if r["doc_id"] in wanted]
    if args.mode == TRIGGER:
        pred = [(r["doc_id"], r["sentence"], r["s"], r["e"], r["label"]) for r in rows]
        gold = gold_trigger_items(corpus, wanted)
        report = score_triggers(pred, gold, match=args.match)
        roles = None
    else:
        mapping = None
        if args.map_roles:
            mapping = (RoleMapping.from_file(args.mapping) if args.mapping
                       else RoleMapping())
        pred = []
        for r in rows:
            if "event_type" not in r:
                raise ValidationError(
                    "argument predictions need an event_type field"
                )
            role = r["label"]
            if mapping is not None:
                role = map_generic(role, r["event_type"], mapping)
                if role is None:
                    continue
            pred.append((r["doc_id"], r["sentence"], r["event_type"], role,
                         r["s"], r["e"]))
        gold = gold_argument_items(corpus, wanted, mapping)
        report = score_arguments(pred, gold, match=args.match)
        roles = GENERIC_ROLES if mapping is not None else None
    print(render_table([(args.mode, report)], roles=roles))
    if args.out:
        write_report([(args.mode, report)], args.out, roles=roles)
        print(f"wrote {args.out}")


def cmd_loo(args) -> None:
    examples = distsup.load_examples(args.examples)
    candidates = [ex for ex in examples if isinstance(ex, distsup.ArgumentCandidate)]
    if not candidates:
        raise ValidationError("loo expects argument candidates")
    with open(args.grouping, encoding="utf-8") as fh:
        grouping = json.load(fh)
    table = load_embeddings(args.embeddings) if args.embeddings else None
    grid = _load_grid(args.grid, args.seed)
    plan, pooled, fold_reports = leave_one_out(candidates, grouping, grid, table)
    for fold in plan.folds:
        if fold.get("skipped"):
            print(f"fold {fold['group']}: skipped ({fold['reason']})")
        else:
            print(
                f"fold {fold['group']}: train={fold['train_size']} "
                f"eval={fold['eval_size']}"
            )
    print(render_table([("pooled", pooled)], roles=GENERIC_ROLES))
    if args.out:
        payload = {
            "folds": plan.folds,
            "pooled": pooled.to_json(),
            "per_fold": [r.to_json() for r in fold_reports],
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")


def cmd_arm(args) -> None:
    from .arms import run_arm

    mode, rows = run_arm(args.config)
    roles = GENERIC_ROLES if mode == ARGUMENT else None
    print(render_table(rows, roles=roles))
    out = args.out
    if out is None:
        with open(args.config, encoding="utf-8") as fh:
            out = json.load(fh).get("out")
    if out:
        write_report(rows, out, roles=roles)
        print(f"wrote {out}")


def cmd_sample_for_audit(args) -> None:
    rows = load_predictions(args.pred)
    if args.quotas:
        quotas = {}
        for part in args.quotas.split(","):
            role, _, count = part.partition("=")
            quotas[role.strip()] = int(count)
    else:
        # paper proportions of the 100-prediction audit: 78/8/14
        quotas = {
            "Actor": round(args.n * 0.78),
            "Place": round(args.n * 0.08),
            "Time": round(args.n * 0.14),
        }
    sample = sample_for_audit(rows, seed=args.seed, quotas=quotas)
    out = args.out or (args.pred + ".audit.jsonl")
    with open(out, "w", encoding="utf-8") as fh:
        for row in sample:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"sampled {len(sample)} predictions -> {out}")


def cmd_train_embeddings(args) -> None:
    corpus = load_corpus(args.corpus)
    config = SkipgramConfig(
        dimension=args.dim, window=args.window, negatives=args.neg,
        epochs=args.epochs, seed=args.seed,
    )
    table = train_skipgram(corpus, config)
    save_embeddings(table, args.out)
    print(f"trained {len(table.words)} x {table.dimension} table -> {args.out}")


def cmd_serve(args) -> None:
    service.serve(
        args.project, args.corpus, args.embeddings, args.wordnet,
        port=args.port, host=args.host, ui_dir=args.ui,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="evex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="add seed keywords to an event type")
    p.add_argument("--project", required=True)
    p.add_argument("--type", required=True)
    p.add_argument("--words", required=True, help="comma-separated keywords")
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("expand", help="expand every lexicon from its seeds")
    p.add_argument("--project", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--wordnet")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--min-sim", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=cmd_expand)

    for decision in ("accept", "reject", "move"):
        p = sub.add_parser(decision, help=f"{decision} a trigger candidate")
        p.add_argument("--project", required=True)
        p.add_argument("--type", required=True)
        p.add_argument("--word", required=True)
        if decision == "move":
            p.add_argument("--target", required=True)
        p.set_defaults(func=cmd_decision, decision=decision)

    p = sub.add_parser("distsup", help="generate distant-supervision examples")
    p.add_argument("--project", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--cap", type=int, default=distsup.DEFAULT_CAP)
    p.add_argument("--neg-ratio", type=float, default=distsup.DEFAULT_NEGATIVE_RATIO)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distsup)

    p = sub.add_parser("adjudicate", help="filter examples with human judgments")
    p.add_argument("--examples", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("downsample", help="down-sample examples by document")
    p.add_argument("--examples", required=True)
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("split", help="split a corpus into train/dev/test")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ratios", default="0.6,0.2,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    for kind in (TRIGGER, ARGUMENT):
        p = sub.add_parser(f"train-{kind}", help=f"train the {kind} classifier")
        p.add_argument("--examples", required=True)
        p.add_argument("--split", required=True)
        p.add_argument("--embeddings")
        p.add_argument("--grid", help="JSON grid file (defaults to paper grid)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True)
        p.set_defaults(func=lambda a, kind=kind: _cmd_train(a, kind))

    p = sub.add_parser("map-roles", help="map fine-grained roles to Actor/Place/Time")
    p.add_argument("--examples", required=True)
    p.add_argument("--mapping")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map_roles)

    p = sub.add_parser("predict", help="run a trained model over a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--triggers", help="trigger predictions file (argument models)")
    p.add_argument("--split")
    p.add_argument("--part", default="test", choices=("train", "dev", "test"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="exact-offset scoring against gold annotations")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True, help="corpus file with gold annotations")
    p.add_argument("--mode", required=True, choices=(TRIGGER, ARGUMENT))
    p.add_argument("--match", default="one-to-one", choices=("one-to-one", "any"))
    p.add_argument("--map-roles", action="store_true",
                   help="map prediction and reference roles to Actor/Place/Time")
    p.add_argument("--mapping", help="role mapping override file")
    p.add_argument("--split")
    p.add_argument("--part", default="test", choices=("train", "dev", "test"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("loo", help="leave-one-group-out argument experiment")
    p.add_argument("--examples", required=True)
    p.add_argument("--grouping", required=True)
    p.add_argument("--grid")
    p.add_argument("--embeddings")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_loo)

    p = sub.add_parser("arm", help="run configured experiment arms")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_arm)

    p = sub.add_parser("sample-for-audit", help="export predictions for manual audit")
    p.add_argument("--pred", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quotas", help="e.g. Actor=78,Place=8,Time=14")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample_for_audit)

    p = sub.add_parser("train-embeddings", help="train skip-gram vectors from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--neg", type=int, default=10)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_embeddings)

    p = sub.add_parser("serve", help="run the curation service")
    p.add_argument("--project", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--wordnet")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built frontend assets to host at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"evex {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (EvexError, OSError, KeyError) as exc:
        print(f"evex {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
