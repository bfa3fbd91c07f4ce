"""Featurization plus end-to-end training and inference for the trigger
classifier and the generic argument classifier.

Both models share one architecture (neuralnet.LayerStack); the argument
model adds a second position-feature channel and a second lexical window
anchored at the mention head. Event type is never a feature, which is what
lets one argument model serve event types absent from its training data.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Sentence
from .distsup import (
    NONE_LABEL,
    ArgumentCandidate,
    TriggerExample,
    build_argument_candidates,
)
from .embeddings import EmbeddingTable
from .errors import ValidationError
from .neuralnet import (
    PF_CLAMP,
    PF_DIM,
    PF_ROWS,
    AdadeltaState,
    FeaturizedInstance,
    LayerStack,
    adadelta_step,
    dropout_mask,
)

TRIGGER = "trigger"
ARGUMENT = "argument"

MODEL_FORMAT = "evex-cnn"
MODEL_VERSION = 1


def clamped_distance(token_index: int, anchor: int) -> int:
    """Signed token distance to the anchor, clamped to +/-PF_CLAMP."""
    return max(-PF_CLAMP, min(PF_CLAMP, token_index - anchor))


class Featurizer:
    """Maps token sequences to index instances against a fixed vocabulary.

    Unknown words map to a trained UNK row; lexical windows that run past
    the sentence use a padding row.
    """

    def __init__(self, vocab: Sequence[str]):
        self.vocab = list(vocab)
        self.word_to_id = {w: i for i, w in enumerate(self.vocab)}
        self.unk_id = len(self.vocab)
        self.pad_id = len(self.vocab) + 1

    @property
    def n_rows(self) -> int:
        return len(self.vocab) + 2

    def word_id(self, word: str) -> int:
        return self.word_to_id.get(word.lower(), self.unk_id)

    def _window(self, tokens: Sequence[str], anchor: int) -> list[int]:
        ids = []
        for j in (anchor - 1, anchor, anchor + 1):
            if 0 <= j < len(tokens):
                ids.append(self.word_id(tokens[j]))
            else:
                ids.append(self.pad_id)
        return ids

    def featurize_trigger(self, tokens: Sequence[str], anchor: int) -> FeaturizedInstance:
        if not (0 <= anchor < len(tokens)):
            raise ValidationError(f"anchor {anchor} outside sentence of {len(tokens)} tokens")
        word_ids = np.array([self.word_id(t) for t in tokens], dtype=np.int64)
        pf = np.array(
            [clamped_distance(j, anchor) + PF_CLAMP for j in range(len(tokens))],
            dtype=np.int64,
        )
        lex = np.array(self._window(tokens, anchor), dtype=np.int64)
        return FeaturizedInstance(word_ids=word_ids, pf_trigger_ids=pf, lex_ids=lex)

    def featurize_argument(
        self, tokens: Sequence[str], trigger_anchor: int, mention_head: int
    ) -> FeaturizedInstance:
        if not (0 <= mention_head < len(tokens)):
            raise ValidationError(
                f"mention head {mention_head} outside sentence of {len(tokens)} tokens"
            )
        inst = self.featurize_trigger(tokens, trigger_anchor)
        pf_arg = np.array(
            [clamped_distance(j, mention_head) + PF_CLAMP for j in range(len(tokens))],
            dtype=np.int64,
        )
        lex = np.concatenate(
            [inst.lex_ids, np.array(self._window(tokens, mention_head), dtype=np.int64)]
        )
        return FeaturizedInstance(
            word_ids=inst.word_ids,
            pf_trigger_ids=inst.pf_trigger_ids,
            lex_ids=lex,
            pf_arg_ids=pf_arg,
        )


@dataclass
class TrainConfig:
    """Hyperparameter grid; every combination is trained and the dev set
    picks the winner."""

    epochs: tuple[int, ...] = (5, 10, 20)
    pos_weights: tuple[float, ...] = (1.0, 3.0, 5.0, 10.0)
    batch_sizes: tuple[int, ...] = (16, 32)
    filter_counts: tuple[int, ...] = (64, 128)
    filter_width: int = 3
    dropout: float = 0.5
    d_word: int = 50  # only used without a pre-trained table
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("epochs", "pos_weights", "batch_sizes", "filter_counts"):
            if not getattr(self, name):
                raise ValidationError(f"grid field {name} must be non-empty")

    def points(self):
        return list(itertools.product(
            self.filter_counts, self.batch_sizes, self.pos_weights, self.epochs
        ))

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        kwargs = {}
        for name in ("epochs", "pos_weights", "batch_sizes", "filter_counts"):
            if name in data:
                kwargs[name] = tuple(data[name])
        for name in ("filter_width", "dropout", "d_word", "seed"):
            if name in data:
                kwargs[name] = data[name]
        return cls(**kwargs)


@dataclass(frozen=True)
class TriggerPrediction:
    doc_id: str
    sentence: int
    start: int
    end: int
    tok_start: int
    tok_end: int
    label: str
    confidence: float

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id, "sentence": self.sentence,
            "s": self.start, "e": self.end,
            "label": self.label, "conf": self.confidence,
        }


@dataclass(frozen=True)
class ArgumentPrediction:
    doc_id: str
    sentence: int
    start: int
    end: int
    label: str  # role
    event_type: str
    trigger_start: int
    trigger_end: int
    confidence: float

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id, "sentence": self.sentence,
            "s": self.start, "e": self.end,
            "label": self.label, "conf": self.confidence,
            "trigger_s": self.trigger_start, "trigger_e": self.trigger_end,
            "event_type": self.event_type,
        }


@dataclass
class CnnModel:
    kind: str  # trigger | argument
    labels: list[str]
    featurizer: Featurizer
    stack: LayerStack
    config: dict = field(default_factory=dict)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"label {label!r} unknown to this model") from None

    def save(self, path: str | Path) -> None:
        params = {k: v.tolist() for k, v in self.stack.params().items()}
        data = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "labels": self.labels,
            "vocab": self.featurizer.vocab,
            "dropout": self.stack.dropout,
            "config": self.config,
            "params": params,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "CnnModel":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("format") != MODEL_FORMAT:
            raise ValidationError(f"{path}: not a model file")
        params = {k: np.array(v, dtype=np.float64) for k, v in data["params"].items()}
        stack = LayerStack(
            word_emb=params["word_emb"],
            pf_trigger=params["pf_trigger"],
            conv_w=params["conv_w"],
            conv_b=params["conv_b"],
            out_w=params["out_w"],
            out_b=params["out_b"],
            pf_arg=params.get("pf_arg"),
            dropout=data.get("dropout", 0.5),
        )
        return cls(
            kind=data["kind"],
            labels=list(data["labels"]),
            featurizer=Featurizer(data["vocab"]),
            stack=stack,
            config=dict(data.get("config", {})),
        )


def build_vocab(examples: Sequence[TriggerExample | ArgumentCandidate]) -> list[str]:
    return sorted({t.lower() for ex in examples for t in ex.tokens})


def init_stack(
    rng: np.random.Generator,
    featurizer: Featurizer,
    table: EmbeddingTable | None,
    d_word: int,
    n_labels: int,
    n_filters: int,
    filter_width: int,
    kind: str,
    dropout: float,
) -> LayerStack:
    word_emb = np.zeros((featurizer.n_rows, d_word))
    for i, word in enumerate(featurizer.vocab):
        vec = table.get(word) if table is not None else None
        if vec is not None:
            word_emb[i] = vec
        else:
            word_emb[i] = rng.uniform(-0.25, 0.25, d_word)
    word_emb[featurizer.unk_id] = rng.uniform(-0.25, 0.25, d_word)
    # padding row stays zero but remains trainable

    pf_trigger = rng.uniform(-0.25, 0.25, (PF_ROWS, PF_DIM))
    pf_arg = rng.uniform(-0.25, 0.25, (PF_ROWS, PF_DIM)) if kind == ARGUMENT else None

    d_in = d_word + PF_DIM + (PF_DIM if kind == ARGUMENT else 0)
    lex_words = 6 if kind == ARGUMENT else 3
    limit = np.sqrt(6.0 / (filter_width * d_in + n_filters))
    conv_w = rng.uniform(-limit, limit, (n_filters, filter_width, d_in))
    conv_b = np.zeros(n_filters)
    h_dim = n_filters + lex_words * d_word
    limit = np.sqrt(6.0 / (h_dim + n_labels))
    out_w = rng.uniform(-limit, limit, (n_labels, h_dim))
    out_b = np.zeros(n_labels)
    return LayerStack(
        word_emb=word_emb, pf_trigger=pf_trigger, pf_arg=pf_arg,
        conv_w=conv_w, conv_b=conv_b, out_w=out_w, out_b=out_b,
        dropout=dropout,
    )


def _to_instance(featurizer: Featurizer,
                 ex: TriggerExample | ArgumentCandidate) -> FeaturizedInstance:
    if isinstance(ex, TriggerExample):
        return featurizer.featurize_trigger(ex.tokens, ex.tok_end - 1)
    return featurizer.featurize_argument(
        ex.tokens, ex.trigger_tok_end - 1, ex.mention_tok_end - 1
    )


def _label_micro_f1(pairs: Sequence[tuple[str, str]]) -> float:
    """Micro F1 over (predicted, gold) label pairs with NONE excluded, used
    only for dev-side model selection."""
    predicted = sum(1 for p, _ in pairs if p != NONE_LABEL)
    gold = sum(1 for _, g in pairs if g != NONE_LABEL)
    matched = sum(1 for p, g in pairs if p == g != NONE_LABEL)
    if predicted == 0 or gold == 0 or matched == 0:
        return 0.0
    precision = matched / predicted
    recall = matched / gold
    return 2 * precision * recall / (precision + recall)


def _train_single(
    instances: list[FeaturizedInstance],
    label_ids: list[int],
    featurizer: Featurizer,
    table: EmbeddingTable | None,
    labels: list[str],
    kind: str,
    n_filters: int,
    batch_size: int,
    pos_weight: float,
    epochs: int,
    filter_width: int,
    dropout: float,
    d_word: int,
    seed_seq: np.random.SeedSequence,
) -> LayerStack:
    rng = np.random.default_rng(seed_seq)
    if table is not None:
        d_word = table.dimension
    stack = init_stack(
        rng, featurizer, table, d_word, len(labels), n_filters, filter_width,
        kind, dropout,
    )
    weights = np.array([1.0 if l == NONE_LABEL else pos_weight for l in labels])
    state = AdadeltaState()
    params = stack.params()
    h_dim = stack.out_w.shape[1]
    n = len(instances)
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            batch = order[lo : lo + batch_size]
            total: dict[str, np.ndarray] = {}
            for idx in batch:
                mask = dropout_mask(rng, h_dim, dropout)
                _, grads = stack.loss_and_grads(
                    instances[idx], label_ids[idx], weights, mask
                )
                for name, g in grads.items():
                    if name in total:
                        total[name] += g
                    else:
                        total[name] = g
            for g in total.values():
                g /= len(batch)
            adadelta_step(params, total, state)
    return stack


def train(
    examples: Sequence[TriggerExample | ArgumentCandidate],
    dev: Sequence[TriggerExample | ArgumentCandidate],
    config: TrainConfig,
    table: EmbeddingTable | None,
    kind: str,
) -> tuple[CnnModel, dict]:
    """Grid search over config.points(): train one model per point, select
    the one with the best dev micro-F1 (NONE excluded). Ties prefer fewer
    filter maps, then fewer epochs, then grid order. Deterministic for a
    fixed config.seed."""
    if kind not in (TRIGGER, ARGUMENT):
        raise ValidationError(f"unknown model kind {kind!r}")
    if not dev:
        raise ValidationError("model selection requires a non-empty dev set")
    train_labels = {ex.label for ex in examples}
    if len(train_labels) < 2:
        raise ValidationError(
            f"training data must contain at least 2 distinct labels, got {train_labels}"
        )
    labels = [NONE_LABEL] + sorted(l for l in train_labels if l != NONE_LABEL)
    vocab = build_vocab(examples)
    featurizer = Featurizer(vocab)
    label_to_id = {l: i for i, l in enumerate(labels)}
    instances = [_to_instance(featurizer, ex) for ex in examples]
    label_ids = [label_to_id[ex.label] for ex in examples]
    dev_instances = [_to_instance(featurizer, ex) for ex in dev]

    best = None  # (f1, filters, epochs, index, stack, point)
    rows = []
    for index, (n_filters, batch, pos_weight, epochs) in enumerate(config.points()):
        stack = _train_single(
            instances, label_ids, featurizer, table, labels, kind,
            n_filters, batch, pos_weight, epochs,
            config.filter_width, config.dropout, config.d_word,
            np.random.SeedSequence([config.seed, index]),
        )
        pairs = []
        for inst, ex in zip(dev_instances, dev):
            probs = stack.predict_proba(inst)
            pairs.append((labels[int(np.argmax(probs))], ex.label))
        f1 = _label_micro_f1(pairs)
        rows.append({
            "filters": n_filters, "batch": batch, "pos_weight": pos_weight,
            "epochs": epochs, "dev_f1": f1,
        })
        better = (
            best is None
            or f1 > best[0]
            or (f1 == best[0] and (n_filters, epochs) < (best[1], best[2]))
        )
        if better:
            best = (f1, n_filters, epochs, index, stack)
    assert best is not None
    selected = best[3]
    rows[selected]["selected"] = True
    model = CnnModel(
        kind=kind,
        labels=labels,
        featurizer=featurizer,
        stack=best[4],
        config={
            "seed": config.seed,
            "filter_width": config.filter_width,
            "dropout": config.dropout,
            **{k: rows[selected][k] for k in ("filters", "batch", "pos_weight", "epochs")},
        },
    )
    return model, {"grid": rows, "selected": selected}


def predict_triggers(
    model: CnnModel, sentence: Sentence, doc_id: str = "", sent_idx: int = 0
) -> list[TriggerPrediction]:
    """Classify every token and merge adjacent same-type hits into one span;
    NONE predictions are not emitted."""
    if model.kind != TRIGGER:
        raise ValidationError(f"expected a trigger model, got {model.kind!r}")
    tokens = [t.text for t in sentence.tokens]
    hits: list[tuple[int, str, float]] = []
    for i in range(len(tokens)):
        inst = model.featurizer.featurize_trigger(tokens, i)
        probs = model.stack.predict_proba(inst)
        best = int(np.argmax(probs))
        label = model.labels[best]
        if label != NONE_LABEL:
            hits.append((i, label, float(probs[best])))
    out: list[TriggerPrediction] = []
    k = 0
    while k < len(hits):
        i, label, conf = hits[k]
        j = k
        while (
            j + 1 < len(hits)
            and hits[j + 1][0] == hits[j][0] + 1
            and hits[j + 1][1] == label
        ):
            j += 1
            conf = max(conf, hits[j][2])
        out.append(
            TriggerPrediction(
                doc_id=doc_id,
                sentence=sent_idx,
                start=sentence.tokens[i].start,
                end=sentence.tokens[hits[j][0]].end,
                tok_start=i,
                tok_end=hits[j][0] + 1,
                label=label,
                confidence=conf,
            )
        )
        k = j + 1
    return out


def predict_arguments(
    model: CnnModel,
    sentence: Sentence,
    triggers: Sequence[tuple[int, int, str]],
    doc_id: str = "",
    sent_idx: int = 0,
    time_for_time_mentions_only: bool = True,
) -> list[ArgumentPrediction]:
    """Classify every (trigger, mention) pair; non-NONE predictions inherit
    the trigger's event type. By default the Time role is only available to
    time mentions."""
    if model.kind != ARGUMENT:
        raise ValidationError(f"expected an argument model, got {model.kind!r}")
    candidates = build_argument_candidates(
        sentence, triggers, doc_id=doc_id, sent_idx=sent_idx, attach_gold=False
    )
    out: list[ArgumentPrediction] = []
    for cand in candidates:
        inst = _to_instance(model.featurizer, cand)
        probs = model.stack.predict_proba(inst)
        if (
            time_for_time_mentions_only
            and cand.mention_kind != "time"
            and "Time" in model.labels
        ):
            probs = probs.copy()
            probs[model.labels.index("Time")] = 0.0
            probs = probs / probs.sum()
        best = int(np.argmax(probs))
        label = model.labels[best]
        if label == NONE_LABEL:
            continue
        out.append(
            ArgumentPrediction(
                doc_id=doc_id,
                sentence=sent_idx,
                start=cand.start,
                end=cand.end,
                label=label,
                event_type=cand.event_type,
                trigger_start=cand.trigger_start,
                trigger_end=cand.trigger_end,
                confidence=float(probs[best]),
            )
        )
    return out


def write_predictions(
    predictions: Sequence[TriggerPrediction | ArgumentPrediction], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            fh.write(json.dumps(pred.to_json(), ensure_ascii=False) + "\n")


def load_predictions(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out
