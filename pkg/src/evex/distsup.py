"""Distant supervision: locate curated triggers in an unannotated corpus to
mint training examples, sample NONE-labeled negatives, apply human
adjudication, down-sample by document, and pair triggers with mentions to
form argument candidates.

Examples are self-contained (they carry their sentence's tokens) so that
downstream training stages work from the examples file alone.
"""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, Sentence
from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

NONE_LABEL = "NONE"

DISTANT = "distant"
ADJUDICATED = "adjudicated"
NEGATIVE = "negative"

DEFAULT_CAP = 60
DEFAULT_NEGATIVE_RATIO = 3.0


@dataclass
class TriggerExample:
    doc_id: str
    sentence: int
    tok_start: int
    tok_end: int  # exclusive
    start: int  # character offsets within the sentence
    end: int
    label: str
    provenance: str
    judgment: str | None = None
    tokens: list[str] = field(default_factory=list)

    @property
    def example_id(self) -> str:
        return f"{self.doc_id}:{self.sentence}:{self.tok_start}:{self.tok_end}:{self.label}"

    def to_json(self) -> dict:
        out = asdict(self)
        out["kind"] = "trigger"
        return out


@dataclass
class ArgumentCandidate:
    doc_id: str
    sentence: int
    trigger_tok_start: int
    trigger_tok_end: int
    trigger_start: int
    trigger_end: int
    event_type: str
    mention_tok_start: int
    mention_tok_end: int
    start: int
    end: int
    mention_kind: str
    label: str | None = None
    tokens: list[str] = field(default_factory=list)

    @property
    def example_id(self) -> str:
        return (
            f"{self.doc_id}:{self.sentence}:{self.trigger_tok_start}:"
            f"{self.trigger_tok_end}:{self.mention_tok_start}:{self.mention_tok_end}"
        )

    def to_json(self) -> dict:
        out = asdict(self)
        out["kind"] = "argument"
        return out


def _trigger_sequences(words: Iterable[str]) -> list[tuple[str, ...]]:
    return sorted({tuple(w.lower().split()) for w in words if w.strip()})


def find_occurrences(
    corpus: Corpus,
    lexicons: Mapping[str, Iterable[str]],
    cap: int = DEFAULT_CAP,
) -> list[TriggerExample]:
    """Case-insensitive exact token-sequence matching of every final trigger,
    walking the corpus in order and keeping at most `cap` positives per event
    type. A span shared by triggers of several types yields one example per
    type.
    """
    if cap < 1:
        raise ValidationError(f"cap must be >= 1, got {cap}")
    if not lexicons:
        raise ValidationError("no trigger lexicons supplied")
    sequences = {
        event_type: _trigger_sequences(words)
        for event_type, words in sorted(lexicons.items())
    }
    counts = {event_type: 0 for event_type in sequences}
    out: list[TriggerExample] = []
    for doc in corpus:
        for sent_idx, sent in enumerate(doc.sentences):
            lowered = [t.text.lower() for t in sent.tokens]
            for i in range(len(lowered)):
                for event_type, seqs in sequences.items():
                    if counts[event_type] >= cap:
                        continue
                    for seq in seqs:
                        j = i + len(seq)
                        if j > len(lowered) or tuple(lowered[i:j]) != seq:
                            continue
                        out.append(
                            TriggerExample(
                                doc_id=doc.doc_id,
                                sentence=sent_idx,
                                tok_start=i,
                                tok_end=j,
                                start=sent.tokens[i].start,
                                end=sent.tokens[j - 1].end,
                                label=event_type,
                                provenance=DISTANT,
                                tokens=[t.text for t in sent.tokens],
                            )
                        )
                        counts[event_type] += 1
                        if counts[event_type] >= cap:
                            break
    return out


def sample_negatives(
    corpus: Corpus,
    lexicons: Mapping[str, Iterable[str]],
    ratio: float,
    seed: int,
    positives: Sequence[TriggerExample],
) -> list[TriggerExample]:
    """Uniformly sample ceil(ratio * #positives) single-token NONE examples.

    A token is eligible when its lower-cased text appears in no lexicon and
    its position overlaps no positive span. When the corpus cannot supply
    enough, everything eligible is returned and a warning is logged.
    """
    if ratio <= 0:
        raise ValidationError(f"negative ratio must be > 0, got {ratio}")
    trigger_words = {
        w.lower() for words in lexicons.values() for w in words if w.strip()
    }
    positive_spans: dict[tuple[str, int], list[tuple[int, int]]] = {}
    for ex in positives:
        positive_spans.setdefault((ex.doc_id, ex.sentence), []).append(
            (ex.tok_start, ex.tok_end)
        )
    eligible: list[TriggerExample] = []
    for doc in corpus:
        for sent_idx, sent in enumerate(doc.sentences):
            spans = positive_spans.get((doc.doc_id, sent_idx), [])
            for i, tok in enumerate(sent.tokens):
                if tok.text.lower() in trigger_words:
                    continue
                if any(s <= i < e for s, e in spans):
                    continue
                eligible.append(
                    TriggerExample(
                        doc_id=doc.doc_id,
                        sentence=sent_idx,
                        tok_start=i,
                        tok_end=i + 1,
                        start=tok.start,
                        end=tok.end,
                        label=NONE_LABEL,
                        provenance=NEGATIVE,
                        tokens=[t.text for t in sent.tokens],
                    )
                )
    wanted = math.ceil(ratio * len(positives))
    if wanted > len(eligible):
        log.warning(
            "requested %d negatives but only %d tokens are eligible",
            wanted, len(eligible),
        )
        return eligible
    chosen = random.Random(seed).sample(range(len(eligible)), wanted)
    return [eligible[i] for i in sorted(chosen)]


def adjudicate(
    examples: Sequence[TriggerExample],
    judgments: Mapping[str, str],
) -> list[TriggerExample]:
    """Filter positives with human judgments: correct ones survive with
    provenance `adjudicated`, incorrect ones are dropped, unjudged positives
    and all negatives pass through unchanged."""
    known = {ex.example_id for ex in examples}
    for example_id in judgments:
        if example_id not in known:
            raise ValidationError(f"judgment for unknown example {example_id!r}")
    for verdict in judgments.values():
        if verdict not in ("correct", "incorrect"):
            raise ValidationError(f"judgment must be correct|incorrect, got {verdict!r}")
    out: list[TriggerExample] = []
    for ex in examples:
        if ex.provenance == NEGATIVE:
            out.append(ex)
            continue
        verdict = judgments.get(ex.example_id)
        if verdict == "incorrect":
            continue
        if verdict == "correct":
            ex = TriggerExample(**{**asdict(ex), "provenance": ADJUDICATED,
                                   "judgment": "correct"})
        out.append(ex)
    return out


def downsample_documents(
    examples: Sequence[TriggerExample],
    target_doc_count: int,
    seed: int,
) -> list[TriggerExample]:
    """Keep the examples of a seeded uniform sample of target_doc_count
    documents; documents are kept or dropped whole."""
    docs = sorted({ex.doc_id for ex in examples})
    if target_doc_count > len(docs):
        raise ValidationError(
            f"cannot down-sample to {target_doc_count} documents, only "
            f"{len(docs)} present"
        )
    keep = set(random.Random(seed).sample(docs, target_doc_count))
    return [ex for ex in examples if ex.doc_id in keep]


def build_argument_candidates(
    sentence: Sentence,
    triggers: Sequence[tuple[int, int, str]],
    doc_id: str = "",
    sent_idx: int = 0,
    attach_gold: bool = True,
) -> list[ArgumentCandidate]:
    """Pair every trigger (token span + event type) with every entity/time
    mention in the sentence. With attach_gold, labels come from the
    sentence's gold arguments matched on exact character spans (NONE when no
    gold argument covers the pair); otherwise labels stay unset for
    inference.
    """
    gold: dict[tuple[int, int, int, int], str] = {}
    if attach_gold and sentence.gold_args:
        for ga in sentence.gold_args:
            gold[(ga.trigger_start, ga.trigger_end, ga.start, ga.end)] = ga.role
    out: list[ArgumentCandidate] = []
    token_texts = [t.text for t in sentence.tokens]
    for tok_s, tok_e, event_type in triggers:
        if not (0 <= tok_s < tok_e <= len(sentence.tokens)):
            raise ValidationError(
                f"trigger token span ({tok_s},{tok_e}) outside sentence"
            )
        trig_cs = sentence.tokens[tok_s].start
        trig_ce = sentence.tokens[tok_e - 1].end
        for mention in sentence.mentions:
            span = sentence.token_span_for(mention.start, mention.end)
            if span is None:
                raise ValidationError(
                    f"mention span ({mention.start},{mention.end}) not aligned "
                    "to token boundaries"
                )
            label = None
            if attach_gold:
                label = gold.get(
                    (trig_cs, trig_ce, mention.start, mention.end), NONE_LABEL
                )
            out.append(
                ArgumentCandidate(
                    doc_id=doc_id,
                    sentence=sent_idx,
                    trigger_tok_start=tok_s,
                    trigger_tok_end=tok_e,
                    trigger_start=trig_cs,
                    trigger_end=trig_ce,
                    event_type=event_type,
                    mention_tok_start=span[0],
                    mention_tok_end=span[1],
                    start=mention.start,
                    end=mention.end,
                    mention_kind=mention.kind,
                    label=label,
                    tokens=token_texts,
                )
            )
    return out


def gold_trigger_spans(sentence: Sentence) -> list[tuple[int, int, str]]:
    """Token spans + event types of the gold triggers of a sentence."""
    out = []
    for gt in sentence.gold_triggers or []:
        span = sentence.token_span_for(gt.start, gt.end)
        if span is None:
            raise ValidationError(
                f"gold trigger span ({gt.start},{gt.end}) not aligned to tokens"
            )
        out.append((span[0], span[1], gt.event_type))
    return out


def write_examples(examples: Iterable[TriggerExample | ArgumentCandidate],
                   path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")


def load_examples(path: str | Path) -> list[TriggerExample | ArgumentCandidate]:
    out: list[TriggerExample | ArgumentCandidate] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                kind = data.pop("kind")
                if kind == "trigger":
                    out.append(TriggerExample(**data))
                elif kind == "argument":
                    out.append(ArgumentCandidate(**data))
                else:
                    raise ValueError(f"unknown example kind {kind!r}")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    return out
