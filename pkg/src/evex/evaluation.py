"""Exact-offset scoring for triggers and arguments, micro-averaged with
per-label breakdowns, plus the leave-one-group-out argument harness and the
audit-sample exporter.

Matching is one-to-one by default: every gold item can satisfy at most one
prediction, so duplicated predictions cost precision. `match="any"` scores
each side against bare key membership instead.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .distsup import NONE_LABEL, ArgumentCandidate
from .errors import ValidationError
from .models import ARGUMENT, CnnModel, TrainConfig, _to_instance, train
from .rolemap import RoleMapping, map_generic

ONE_TO_ONE = "one-to-one"
ANY = "any"

# scoring keys
TriggerItem = tuple[str, int, int, int, str]            # doc, sent, s, e, type
ArgumentItem = tuple[str, int, str, str, int, int]      # doc, sent, type, role, s, e


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f1: float
    per_label: dict[str, dict] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "overall": {"p": self.precision, "r": self.recall, "f1": self.f1},
            "per_label": self.per_label,
            "counts": self.counts,
        }


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _match_counts(pred: Sequence, gold: Sequence, match: str) -> tuple[int, int]:
    """(matched predictions, matched gold items) under the chosen policy."""
    if match == ONE_TO_ONE:
        pred_counts = Counter(pred)
        gold_counts = Counter(gold)
        matched = sum(
            min(c, gold_counts.get(key, 0)) for key, c in pred_counts.items()
        )
        return matched, matched
    if match == ANY:
        gold_keys = set(gold)
        pred_keys = set(pred)
        return (
            sum(1 for p in pred if p in gold_keys),
            sum(1 for g in gold if g in pred_keys),
        )
    raise ValidationError(f"unknown match mode {match!r}")


def _score(pred: Sequence, gold: Sequence, label_of, match: str) -> ScoreReport:
    matched_pred, matched_gold = _match_counts(pred, gold, match)
    precision = matched_pred / len(pred) if pred else 0.0
    recall = matched_gold / len(gold) if gold else 0.0
    per_label: dict[str, dict] = {}
    for label in sorted({label_of(x) for x in pred} | {label_of(x) for x in gold}):
        lp = [x for x in pred if label_of(x) == label]
        lg = [x for x in gold if label_of(x) == label]
        mp, mg = _match_counts(lp, lg, match)
        p = mp / len(lp) if lp else 0.0
        r = mg / len(lg) if lg else 0.0
        per_label[label] = {
            "p": p, "r": r, "f1": _f1(p, r),
            "predicted": len(lp), "gold": len(lg), "matched": mp,
        }
    counts = {
        "predicted": len(pred),
        "gold": len(gold),
        "matched": matched_pred,
    }
    if match == ANY:
        counts["matched_gold"] = matched_gold
    return ScoreReport(
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        per_label=per_label,
        counts=counts,
    )


def score_triggers(
    pred: Sequence[TriggerItem], gold: Sequence[TriggerItem],
    match: str = ONE_TO_ONE,
) -> ScoreReport:
    """A prediction is correct iff event type, start and end all equal a
    gold trigger's."""
    return _score(pred, gold, lambda item: item[4], match)


def score_arguments(
    pred: Sequence[ArgumentItem], gold: Sequence[ArgumentItem],
    match: str = ONE_TO_ONE,
) -> ScoreReport:
    """A prediction is correct iff event type, role and argument offsets
    equal a reference argument's; trigger offsets are not compared."""
    return _score(pred, gold, lambda item: item[3], match)


def gold_trigger_items(
    corpus: Corpus, doc_ids: Iterable[str] | None = None
) -> list[TriggerItem]:
    wanted = set(doc_ids) if doc_ids is not None else None
    items: list[TriggerItem] = []
    for doc in corpus:
        if wanted is not None and doc.doc_id not in wanted:
            continue
        for idx, sent in enumerate(doc.sentences):
            for gt in sent.gold_triggers or []:
                items.append((doc.doc_id, idx, gt.start, gt.end, gt.event_type))
    return items


def gold_argument_items(
    corpus: Corpus,
    doc_ids: Iterable[str] | None = None,
    mapping: RoleMapping | None = None,
) -> list[ArgumentItem]:
    """Reference argument tuples; the event type of each argument comes from
    the gold trigger sharing its trigger span. With a role mapping, roles
    are rewritten and unmapped references drop out."""
    wanted = set(doc_ids) if doc_ids is not None else None
    items: list[ArgumentItem] = []
    for doc in corpus:
        if wanted is not None and doc.doc_id not in wanted:
            continue
        for idx, sent in enumerate(doc.sentences):
            types = {
                (gt.start, gt.end): gt.event_type for gt in sent.gold_triggers or []
            }
            for ga in sent.gold_args or []:
                event_type = types.get((ga.trigger_start, ga.trigger_end))
                if event_type is None:
                    raise ValidationError(
                        f"doc {doc.doc_id!r} sentence {idx}: gold argument refers "
                        f"to trigger span ({ga.trigger_start},{ga.trigger_end}) "
                        "with no gold trigger"
                    )
                role = ga.role
                if mapping is not None:
                    role = map_generic(role, event_type, mapping)
                    if role is None:
                        continue
                items.append((doc.doc_id, idx, event_type, role, ga.start, ga.end))
    return items


@dataclass
class FoldPlan:
    grouping: dict[str, str]
    folds: list[dict] = field(default_factory=list)


def leave_one_out(
    examples: Sequence[ArgumentCandidate],
    grouping: Mapping[str, str],
    config: TrainConfig,
    table,
    eval_examples: Sequence[ArgumentCandidate] | None = None,
    dev_fraction: float = 0.2,
) -> tuple[FoldPlan, ScoreReport, list[ScoreReport]]:
    """Per event-type group: train an argument model with the group's
    examples withheld, evaluate only on that group, pool match counts over
    all folds. Groups without eval examples are skipped with a notice in
    the plan.
    """
    grouping = dict(grouping)
    pool = list(eval_examples) if eval_examples is not None else list(examples)
    for ex in list(examples) + pool:
        if ex.event_type not in grouping:
            raise ValidationError(f"event type {ex.event_type!r} missing from grouping")
    groups = sorted({grouping[ex.event_type] for ex in pool} |
                    {grouping[ex.event_type] for ex in examples})
    if len(groups) < 2:
        raise ValidationError(f"leave-one-out needs >= 2 groups, got {len(groups)}")
    plan = FoldPlan(grouping=grouping)
    pooled_pred: list[ArgumentItem] = []
    pooled_gold: list[ArgumentItem] = []
    fold_reports: list[ScoreReport] = []
    for group in groups:
        train_pool = [ex for ex in examples if grouping[ex.event_type] != group]
        eval_set = [ex for ex in pool if grouping[ex.event_type] == group]
        if not eval_set:
            plan.folds.append({"group": group, "skipped": True,
                               "reason": "no evaluation examples"})
            continue
        rng = random.Random(config.seed)
        order = list(range(len(train_pool)))
        rng.shuffle(order)
        n_dev = max(1, int(dev_fraction * len(order)))
        dev_idx = set(order[:n_dev])
        fold_train = [train_pool[i] for i in range(len(train_pool)) if i not in dev_idx]
        fold_dev = [train_pool[i] for i in sorted(dev_idx)]
        model, _ = train(fold_train, fold_dev, config, table, ARGUMENT)
        pred, gold = _classify_candidates(model, eval_set)
        report = score_arguments(pred, gold)
        fold_reports.append(report)
        pooled_pred.extend(pred)
        pooled_gold.extend(gold)
        plan.folds.append({
            "group": group, "skipped": False,
            "train_size": len(fold_train) + len(fold_dev),
            "eval_size": len(eval_set),
            "train_event_types": sorted({ex.event_type for ex in train_pool}),
            "eval_event_types": sorted({ex.event_type for ex in eval_set}),
        })
    if not fold_reports:
        raise ValidationError("every fold was skipped; nothing to aggregate")
    return plan, score_arguments(pooled_pred, pooled_gold), fold_reports


def _classify_candidates(
    model: CnnModel, candidates: Sequence[ArgumentCandidate]
) -> tuple[list[ArgumentItem], list[ArgumentItem]]:
    """Predicted and gold argument items for a labeled candidate list."""
    pred: list[ArgumentItem] = []
    gold: list[ArgumentItem] = []
    for cand in candidates:
        inst = _to_instance(model.featurizer, cand)
        probs = model.stack.predict_proba(inst)
        if cand.mention_kind != "time" and "Time" in model.labels:
            probs = probs.copy()
            probs[model.labels.index("Time")] = 0.0
            probs = probs / probs.sum()
        label = model.labels[int(np.argmax(probs))]
        if label != NONE_LABEL:
            pred.append((cand.doc_id, cand.sentence, cand.event_type, label,
                         cand.start, cand.end))
        if cand.label is not None and cand.label != NONE_LABEL:
            gold.append((cand.doc_id, cand.sentence, cand.event_type, cand.label,
                         cand.start, cand.end))
    return pred, gold


def sample_for_audit(
    predictions: Sequence[dict],
    seed: int,
    quotas: Mapping[str, int] | None = None,
) -> list[dict]:
    """Seeded random sample of argument predictions with per-role quotas for
    a manual precision audit. Roles short on predictions contribute what
    they have."""
    if quotas is None:
        quotas = {"Actor": 78, "Place": 8, "Time": 14}
    rng = random.Random(seed)
    out: list[dict] = []
    for role in sorted(quotas):
        pool = [p for p in predictions if p.get("label") == role]
        take = min(quotas[role], len(pool))
        chosen = rng.sample(range(len(pool)), take)
        out.extend(pool[i] for i in sorted(chosen))
    return out


def render_table(rows: Sequence[tuple[str, ScoreReport]],
                 roles: Sequence[str] | None = None) -> str:
    """Aligned text table, one row per arm/report, optionally with per-role
    F1 columns."""
    headers = ["arm", "P", "R", "F1"]
    if roles:
        headers += list(roles)
    lines = []
    body = []
    for name, report in rows:
        row = [name, f"{report.precision:.3f}", f"{report.recall:.3f}",
               f"{report.f1:.3f}"]
        if roles:
            for role in roles:
                entry = report.per_label.get(role)
                row.append(f"{entry['f1']:.3f}" if entry else "-")
        body.append(row)
    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) if body else len(headers[i])
              for i in range(len(headers))]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in body:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def report_rows_json(rows: Sequence[tuple[str, ScoreReport]]) -> list[dict]:
    return [{"arm": name, **report.to_json()} for name, report in rows]


def write_report(rows: Sequence[tuple[str, ScoreReport]], path,
                 roles: Sequence[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_rows_json(rows), fh, indent=2)
        fh.write("\n")

