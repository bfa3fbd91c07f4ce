"""Experiment-arm runner: reproduce the trigger-side comparison (distant vs
adjudicated vs document-down-sampled training sets) and the argument-side
comparison (post-hoc mapped vs pre-mapped vs leave-one-group-out) on any
corpus in the interchange format, emitting one score row per arm.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

from .corpus import Corpus, load_corpus, split_documents
from .distsup import (
    ADJUDICATED,
    NEGATIVE,
    NONE_LABEL,
    ArgumentCandidate,
    TriggerExample,
    adjudicate,
    build_argument_candidates,
    downsample_documents,
    find_occurrences,
    gold_trigger_spans,
    sample_negatives,
)
from .embeddings import load_embeddings
from .errors import ValidationError
from .evaluation import (
    ScoreReport,
    gold_argument_items,
    gold_trigger_items,
    leave_one_out,
    score_arguments,
    score_triggers,
)
from .expansion import Project
from .models import (
    ARGUMENT,
    TRIGGER,
    TrainConfig,
    predict_arguments,
    predict_triggers,
    train,
)
from .rolemap import RoleMapping, map_dataset, map_generic

log = logging.getLogger(__name__)

TRIGGER_ARMS = ("distant", "adjudicated", "downsampled")
ARGUMENT_ARMS = ("normal-mapped", "pre-mapped", "leave-one-out")


def gold_trigger_examples(corpus: Corpus, doc_ids) -> list[TriggerExample]:
    """Per-token instances from gold annotations: one positive per gold
    span (anchored like distant examples), one NONE instance per uncovered
    token. Used as annotated dev/test instance sets."""
    out: list[TriggerExample] = []
    wanted = set(doc_ids)
    for doc in corpus:
        if doc.doc_id not in wanted:
            continue
        for sent_idx, sent in enumerate(doc.sentences):
            texts = [t.text for t in sent.tokens]
            covered: set[int] = set()
            for tok_s, tok_e, event_type in gold_trigger_spans(sent):
                covered.update(range(tok_s, tok_e))
                out.append(TriggerExample(
                    doc_id=doc.doc_id, sentence=sent_idx,
                    tok_start=tok_s, tok_end=tok_e,
                    start=sent.tokens[tok_s].start, end=sent.tokens[tok_e - 1].end,
                    label=event_type, provenance=ADJUDICATED, tokens=texts,
                ))
            for i, tok in enumerate(sent.tokens):
                if i in covered:
                    continue
                out.append(TriggerExample(
                    doc_id=doc.doc_id, sentence=sent_idx,
                    tok_start=i, tok_end=i + 1,
                    start=tok.start, end=tok.end,
                    label=NONE_LABEL, provenance=NEGATIVE, tokens=texts,
                ))
    return out


def candidates_for_docs(corpus: Corpus, doc_ids) -> list[ArgumentCandidate]:
    """Argument candidates for every gold trigger in the given documents,
    with gold role labels attached."""
    out: list[ArgumentCandidate] = []
    wanted = set(doc_ids)
    for doc in corpus:
        if doc.doc_id not in wanted:
            continue
        for sent_idx, sent in enumerate(doc.sentences):
            triggers = gold_trigger_spans(sent)
            if triggers and sent.mentions:
                out.extend(build_argument_candidates(
                    sent, triggers, doc_id=doc.doc_id, sent_idx=sent_idx,
                    attach_gold=True,
                ))
    return out


def _load_grid(data: dict) -> TrainConfig:
    grid = data.get("grid", {})
    kwargs = {}
    for name in ("epochs", "pos_weights", "batch_sizes", "filter_counts"):
        if name in grid:
            kwargs[name] = tuple(grid[name])
    for name in ("filter_width", "dropout", "d_word"):
        if name in grid:
            kwargs[name] = grid[name]
    kwargs["seed"] = data.get("seed", 0)
    return TrainConfig(**kwargs)


def run_trigger_arms(config: dict) -> list[tuple[str, ScoreReport]]:
    corpus = load_corpus(config["corpus"])
    project = Project.load(config["project"])
    table = load_embeddings(config["embeddings"])
    grid = _load_grid(config)
    seed = config.get("seed", 0)
    cap = config.get("cap", 60)
    ratios = tuple(config.get("ratios", (0.6, 0.2, 0.2)))

    lexicons = {t: ws for t, ws in project.final_trigger_sets().items() if ws}
    positives = find_occurrences(corpus, lexicons, cap=cap)
    negatives = sample_negatives(
        corpus, lexicons, config.get("neg_ratio", 3.0), seed, positives
    )
    split = split_documents(corpus, ratios, seed)
    distant_set = [ex for ex in positives + negatives if ex.doc_id in split.train]

    judgments = {}
    if config.get("judgments"):
        with open(config["judgments"], encoding="utf-8") as fh:
            judgments = json.load(fh)
    known = {ex.example_id for ex in distant_set}
    judgments = {k: v for k, v in judgments.items() if k in known}

    dev_examples = gold_trigger_examples(corpus, split.dev)
    gold_test = gold_trigger_items(corpus, split.test)

    adjudicated_set = adjudicate(distant_set, judgments)
    target_docs = len({ex.doc_id for ex in adjudicated_set})
    downsampled_set = downsample_documents(distant_set, target_docs, seed)
    arm_sets = {
        "distant": distant_set,
        "adjudicated": adjudicated_set,
        "downsampled": downsampled_set,
    }

    rows: list[tuple[str, ScoreReport]] = []
    for arm in config.get("arms", TRIGGER_ARMS):
        if arm not in arm_sets:
            raise ValidationError(f"unknown trigger arm {arm!r}")
        log.info("training trigger arm %s on %d examples", arm, len(arm_sets[arm]))
        model, _ = train(arm_sets[arm], dev_examples, grid, table, TRIGGER)
        predicted = []
        for doc in corpus:
            if doc.doc_id not in split.test:
                continue
            for sent_idx, sent in enumerate(doc.sentences):
                for p in predict_triggers(model, sent, doc.doc_id, sent_idx):
                    predicted.append((p.doc_id, p.sentence, p.start, p.end, p.label))
        rows.append((arm, score_triggers(predicted, gold_test)))
    return rows


def run_argument_arms(config: dict) -> list[tuple[str, ScoreReport]]:
    corpus = load_corpus(config["corpus"])
    table = load_embeddings(config["embeddings"]) if config.get("embeddings") else None
    mapping = (
        RoleMapping.from_file(config["mapping"])
        if config.get("mapping") else RoleMapping()
    )
    grid = _load_grid(config)
    seed = config.get("seed", 0)
    ratios = tuple(config.get("ratios", (0.6, 0.2, 0.2)))
    split = split_documents(corpus, ratios, seed)

    raw_train = candidates_for_docs(corpus, split.train)
    raw_dev = candidates_for_docs(corpus, split.dev)
    mapped_train, _ = map_dataset(raw_train, mapping)
    mapped_dev, _ = map_dataset(raw_dev, mapping)
    gold_mapped = gold_argument_items(corpus, split.test, mapping)

    def predict_test(model) -> list[tuple]:
        items = []
        for doc in corpus:
            if doc.doc_id not in split.test:
                continue
            for sent_idx, sent in enumerate(doc.sentences):
                triggers = gold_trigger_spans(sent)
                if not triggers or not sent.mentions:
                    continue
                for p in predict_arguments(model, sent, triggers, doc.doc_id, sent_idx):
                    items.append(
                        (p.doc_id, p.sentence, p.event_type, p.label, p.start, p.end)
                    )
        return items

    rows: list[tuple[str, ScoreReport]] = []
    for arm in config.get("arms", ARGUMENT_ARMS):
        log.info("running argument arm %s", arm)
        if arm == "normal-mapped":
            model, _ = train(raw_train, raw_dev, grid, table, ARGUMENT)
            mapped_pred = []
            for doc_id, sent, event_type, role, s, e in predict_test(model):
                generic = map_generic(role, event_type, mapping)
                if generic is not None:
                    mapped_pred.append((doc_id, sent, event_type, generic, s, e))
            rows.append((arm, score_arguments(mapped_pred, gold_mapped)))
        elif arm == "pre-mapped":
            model, _ = train(mapped_train, mapped_dev, grid, table, ARGUMENT)
            rows.append((arm, score_arguments(predict_test(model), gold_mapped)))
        elif arm == "leave-one-out":
            if not config.get("grouping"):
                raise ValidationError("leave-one-out arm requires a grouping file")
            with open(config["grouping"], encoding="utf-8") as fh:
                grouping = json.load(fh)
            mapped_test, _ = map_dataset(candidates_for_docs(corpus, split.test), mapping)
            _, pooled, _ = leave_one_out(
                mapped_train, grouping, grid, table, eval_examples=mapped_test
            )
            rows.append((arm, pooled))
        else:
            raise ValidationError(f"unknown argument arm {arm!r}")
    return rows


def run_arm(config_path: str | Path) -> tuple[str, list[tuple[str, ScoreReport]]]:
    """Run every arm named in the config; returns the mode and score rows."""
    with open(config_path, encoding="utf-8") as fh:
        config = json.load(fh)
    mode = config.get("mode")
    if mode == TRIGGER:
        return mode, run_trigger_arms(config)
    if mode == ARGUMENT:
        return mode, run_argument_arms(config)
    raise ValidationError(f"arm config must set mode to trigger|argument, got {mode!r}")
