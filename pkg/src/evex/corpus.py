"""Tokenized-document data model, JSON Lines ingestion, and document splitting.

A corpus is a sequence of documents; each document is a sequence of
sentences carrying tokens with character offsets into the sentence text,
plus optional entity/time mentions and gold trigger/argument annotations.
Corpus values are immutable by convention once loaded.
"""
from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError

ENTITY = "entity"
TIME = "time"


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Mention:
    start: int
    end: int
    kind: str  # "entity" | "time"
    label: str = ""


@dataclass(frozen=True)
class GoldTrigger:
    start: int
    end: int
    event_type: str


@dataclass(frozen=True)
class GoldArgument:
    trigger_start: int
    trigger_end: int
    start: int
    end: int
    role: str


@dataclass
class Sentence:
    text: str
    tokens: list[Token]
    mentions: list[Mention] = field(default_factory=list)
    gold_triggers: list[GoldTrigger] | None = None
    gold_args: list[GoldArgument] | None = None

    def token_starts(self) -> set[int]:
        return {t.start for t in self.tokens}

    def token_ends(self) -> set[int]:
        return {t.end for t in self.tokens}

    def token_span_for(self, start: int, end: int) -> tuple[int, int] | None:
        """Token index range [i, j) covering character span [start, end), or
        None when the span does not align to token boundaries."""
        first = last = None
        for i, tok in enumerate(self.tokens):
            if tok.start == start:
                first = i
            if tok.end == end:
                last = i
        if first is None or last is None or last < first:
            return None
        return first, last + 1


@dataclass
class Document:
    doc_id: str
    sentences: list[Sentence]


@dataclass
class Corpus:
    documents: list[Document]

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]

    def get(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.doc_id == doc_id:
                return d
        raise KeyError(doc_id)


@dataclass(frozen=True)
class DatasetSplit:
    train: frozenset[str]
    dev: frozenset[str]
    test: frozenset[str]
    seed: int

    def to_json(self) -> dict:
        return {
            "train": sorted(self.train),
            "dev": sorted(self.dev),
            "test": sorted(self.test),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DatasetSplit":
        return cls(
            train=frozenset(data["train"]),
            dev=frozenset(data["dev"]),
            test=frozenset(data["test"]),
            seed=int(data.get("seed", 0)),
        )


def tokenize(text: str) -> list[Token]:
    """Whitespace tokenization with leading/trailing ASCII punctuation
    detached into single-character tokens. Internal punctuation (e.g. the
    apostrophe in "Tuesday's") is left alone."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        lo, hi = i, j
        head: list[Token] = []
        tail: list[Token] = []
        while lo < hi and text[lo] in string.punctuation:
            head.append(Token(text[lo], lo, lo + 1))
            lo += 1
        while hi > lo and text[hi - 1] in string.punctuation:
            tail.append(Token(text[hi - 1], hi - 1, hi))
            hi -= 1
        tokens.extend(head)
        if lo < hi:
            tokens.append(Token(text[lo:hi], lo, hi))
        tokens.extend(reversed(tail))
        i = j
    return tokens


def _validate_sentence(sent: Sentence, where: str) -> None:
    if not sent.tokens:
        raise ValidationError(f"{where}: sentence has no tokens")
    prev_end = -1
    for tok in sent.tokens:
        if tok.start >= tok.end:
            raise ValidationError(
                f"{where}: token {tok.text!r} has start {tok.start} >= end {tok.end}"
            )
        if tok.start < prev_end:
            raise ValidationError(
                f"{where}: token {tok.text!r} at {tok.start} overlaps previous token"
            )
        if tok.end > len(sent.text):
            raise ValidationError(
                f"{where}: token {tok.text!r} ends at {tok.end}, past sentence text"
            )
        if sent.text[tok.start : tok.end] != tok.text:
            raise ValidationError(
                f"{where}: token text {tok.text!r} does not match sentence text "
                f"at [{tok.start}:{tok.end}]"
            )
        prev_end = tok.end
    for m in sent.mentions:
        if m.kind not in (ENTITY, TIME):
            raise ValidationError(f"{where}: mention kind {m.kind!r} unknown")
        if not (0 <= m.start < m.end <= len(sent.text)):
            raise ValidationError(
                f"{where}: mention span ({m.start},{m.end}) outside sentence"
            )
    starts, ends = sent.token_starts(), sent.token_ends()
    for gt in sent.gold_triggers or []:
        if gt.start not in starts or gt.end not in ends or gt.start >= gt.end:
            raise ValidationError(
                f"{where}: gold trigger span ({gt.start},{gt.end}) misaligned "
                "with token boundaries"
            )
    for ga in sent.gold_args or []:
        for s, e, what in (
            (ga.trigger_start, ga.trigger_end, "trigger"),
            (ga.start, ga.end, "argument"),
        ):
            if s not in starts or e not in ends or s >= e:
                raise ValidationError(
                    f"{where}: gold argument {what} span ({s},{e}) misaligned "
                    "with token boundaries"
                )


def _sentence_from_json(data: dict) -> Sentence:
    tokens = [Token(t["t"], int(t["s"]), int(t["e"])) for t in data["tokens"]]
    mentions = [
        Mention(int(m["s"]), int(m["e"]), m["kind"], m.get("label", ""))
        for m in data.get("mentions", [])
    ]
    gold_triggers = None
    if "gold_triggers" in data:
        gold_triggers = [
            GoldTrigger(int(g["s"]), int(g["e"]), g["type"])
            for g in data["gold_triggers"]
        ]
    gold_args = None
    if "gold_args" in data:
        gold_args = [
            GoldArgument(
                int(g["trigger_s"]), int(g["trigger_e"]),
                int(g["s"]), int(g["e"]), g["role"],
            )
            for g in data["gold_args"]
        ]
    return Sentence(
        text=data["text"],
        tokens=tokens,
        mentions=mentions,
        gold_triggers=gold_triggers,
        gold_args=gold_args,
    )


def _sentence_to_json(sent: Sentence) -> dict:
    out: dict = {
        "text": sent.text,
        "tokens": [{"t": t.text, "s": t.start, "e": t.end} for t in sent.tokens],
    }
    if sent.mentions:
        out["mentions"] = [
            {"s": m.start, "e": m.end, "kind": m.kind, "label": m.label}
            for m in sent.mentions
        ]
    if sent.gold_triggers is not None:
        out["gold_triggers"] = [
            {"s": g.start, "e": g.end, "type": g.event_type}
            for g in sent.gold_triggers
        ]
    if sent.gold_args is not None:
        out["gold_args"] = [
            {
                "trigger_s": g.trigger_start, "trigger_e": g.trigger_end,
                "s": g.start, "e": g.end, "role": g.role,
            }
            for g in sent.gold_args
        ]
    return out


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSON Lines corpus (one document per line, UTF-8)."""
    documents: list[Document] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
            try:
                doc_id = data["doc_id"]
                sentences = [_sentence_from_json(s) for s in data["sentences"]]
            except (KeyError, TypeError) as exc:
                raise ParseError(
                    f"{path}: line {lineno}: missing or malformed field: {exc}"
                ) from exc
            if doc_id in seen_ids:
                raise ValidationError(f"{path}: duplicate doc_id {doc_id!r}")
            seen_ids.add(doc_id)
            for idx, sent in enumerate(sentences):
                _validate_sentence(sent, f"doc {doc_id!r} sentence {idx}")
            documents.append(Document(doc_id=doc_id, sentences=sentences))
    return Corpus(documents)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            record = {
                "doc_id": doc.doc_id,
                "sentences": [_sentence_to_json(s) for s in doc.sentences],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def split_documents(
    corpus: Corpus,
    ratios: Sequence[float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> DatasetSplit:
    """Shuffle documents with a seeded permutation and cut into train/dev/test.

    Dev and test sizes are round(ratio * N); train takes the remainder.
    """
    if len(corpus) == 0:
        raise ValidationError("cannot split an empty corpus")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValidationError(f"ratios must be three positive fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1.0, got {sum(ratios)}")
    ids = corpus.doc_ids()
    random.Random(seed).shuffle(ids)
    n = len(ids)
    n_dev = round(ratios[1] * n)
    n_test = round(ratios[2] * n)
    if n_dev + n_test >= n:
        raise ValidationError(
            f"corpus of {n} documents too small for ratios {tuple(ratios)}"
        )
    train = ids[: n - n_dev - n_test]
    dev = ids[n - n_dev - n_test : n - n_test]
    test = ids[n - n_test :]
    return DatasetSplit(
        train=frozenset(train), dev=frozenset(dev), test=frozenset(test), seed=seed
    )


def load_split(path: str | Path) -> DatasetSplit:
    with open(path, encoding="utf-8") as fh:
        return DatasetSplit.from_json(json.load(fh))


def save_split(split: DatasetSplit, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(split.to_json(), fh, indent=2)
        fh.write("\n")


def sentences_with_ids(
    corpus: Corpus, doc_ids: Iterable[str] | None = None
) -> list[tuple[str, int, Sentence]]:
    """Flatten a corpus into (doc_id, sentence index, sentence) triples in
    corpus order, optionally restricted to a document subset."""
    wanted = set(doc_ids) if doc_ids is not None else None
    out = []
    for doc in corpus:
        if wanted is not None and doc.doc_id not in wanted:
            continue
        for idx, sent in enumerate(doc.sentences):
            out.append((doc.doc_id, idx, sent))
    return out
