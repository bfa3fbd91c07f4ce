"""Per-event-type trigger lexicons: seeding, similarity/hyponym expansion,
human accept/reject/move decisions with an audit trail, and the final
trigger sets fed to distant supervision.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .embeddings import EmbeddingTable, nearest_neighbors
from .errors import ValidationError
from .wordnet import NOUN, VERB, WordNetDb, hyponyms

SEED = "seed"
EMBEDDING = "embedding"
WORDNET = "wordnet"

PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"

DEFAULT_NEIGHBORS = 20
DEFAULT_MIN_SIM = 0.5
DEFAULT_MAX_DEPTH = 1


@dataclass
class TriggerCandidate:
    word: str
    sources: list[str]
    score: float | None = None  # cosine similarity, embedding-sourced only
    status: str = PENDING

    def add_source(self, source: str, score: float | None = None) -> None:
        if source not in self.sources:
            self.sources.append(source)
        if source == EMBEDDING and self.score is None:
            self.score = score


@dataclass
class TriggerLexicon:
    event_type: str
    candidates: dict[str, TriggerCandidate] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.event_type:
            raise ValidationError("event type must be non-empty")

    def add(self, word: str, source: str, score: float | None = None,
            status: str = PENDING) -> TriggerCandidate:
        """Insert or merge a candidate; existing candidates are never
        downgraded, only gain provenance."""
        word = word.lower()
        cand = self.candidates.get(word)
        if cand is None:
            cand = TriggerCandidate(
                word=word, sources=[source],
                score=score if source == EMBEDDING else None,
                status=status,
            )
            self.candidates[word] = cand
        else:
            cand.add_source(source, score)
            if status == ACCEPTED:
                cand.status = ACCEPTED
        return cand

    def accepted_seeds(self) -> list[TriggerCandidate]:
        return [
            c for c in self.candidates.values()
            if SEED in c.sources and c.status == ACCEPTED
        ]


@dataclass
class ExpansionSummary:
    added_embedding: list[str] = field(default_factory=list)
    added_wordnet: list[str] = field(default_factory=list)
    oov_seeds: list[str] = field(default_factory=list)
    phrase_seeds_skipped: list[str] = field(default_factory=list)

    @property
    def added(self) -> list[str]:
        return self.added_embedding + [
            w for w in self.added_wordnet if w not in self.added_embedding
        ]


def seed_lexicon(event_type: str, keywords) -> TriggerLexicon:
    """Start a lexicon from user-provided keywords; seeds are lower-cased
    and accepted immediately."""
    keywords = list(keywords)
    if not keywords:
        raise ValidationError("at least one seed keyword is required")
    lex = TriggerLexicon(event_type=event_type)
    for word in keywords:
        lex.add(word, SEED, status=ACCEPTED)
    return lex


def expand(
    lexicon: TriggerLexicon,
    table: EmbeddingTable | None = None,
    db: WordNetDb | None = None,
    k: int = DEFAULT_NEIGHBORS,
    min_sim: float = DEFAULT_MIN_SIM,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ExpansionSummary:
    """Grow a lexicon from its accepted seeds.

    Single-token seeds contribute their top-k embedding neighbors above
    min_sim; every accepted seed contributes noun and verb hyponyms. New
    words arrive as pending candidates; re-running on unchanged inputs is a
    no-op. Out-of-vocabulary seeds are reported, not fatal.
    """
    seeds = lexicon.accepted_seeds()
    if not seeds:
        raise ValidationError(
            f"lexicon {lexicon.event_type!r} has no accepted seeds to expand"
        )
    summary = ExpansionSummary()
    for seed in seeds:
        if table is not None:
            if " " in seed.word:
                summary.phrase_seeds_skipped.append(seed.word)
            else:
                neighbors = nearest_neighbors(table, seed.word, k, min_sim)
                if neighbors is None:
                    summary.oov_seeds.append(seed.word)
                else:
                    for word, score in neighbors:
                        if word not in lexicon.candidates:
                            summary.added_embedding.append(word)
                        lexicon.add(word, EMBEDDING, score=score)
        if db is not None:
            lemmas = set()
            for pos in (NOUN, VERB):
                lemmas |= hyponyms(db, seed.word, pos, max_depth)
            for word in sorted(lemmas):
                if word not in lexicon.candidates:
                    summary.added_wordnet.append(word)
                lexicon.add(word, WORDNET)
    return summary


def final_triggers(lexicon: TriggerLexicon) -> set[str]:
    """Seed and accepted-expansion words only; pending and rejected
    candidates never reach distant supervision."""
    return {c.word for c in lexicon.candidates.values() if c.status == ACCEPTED}


@dataclass
class Project:
    name: str
    lexicons: dict[str, TriggerLexicon] = field(default_factory=dict)
    config: dict = field(default_factory=lambda: {
        "k": DEFAULT_NEIGHBORS,
        "min_sim": DEFAULT_MIN_SIM,
        "max_depth": DEFAULT_MAX_DEPTH,
    })
    audit: list[dict] = field(default_factory=list)

    def add_type(self, event_type: str) -> TriggerLexicon:
        if event_type in self.lexicons:
            raise ValidationError(f"event type {event_type!r} already exists")
        lex = TriggerLexicon(event_type=event_type)
        self.lexicons[event_type] = lex
        return lex

    def remove_type(self, event_type: str) -> None:
        if event_type not in self.lexicons:
            raise ValidationError(f"unknown event type {event_type!r}")
        del self.lexicons[event_type]

    def seed(self, event_type: str, keywords) -> TriggerLexicon:
        lex = self.lexicons.get(event_type)
        if lex is None:
            lex = self.add_type(event_type)
        for word in keywords:
            lex.add(word, SEED, status=ACCEPTED)
        if not lex.candidates:
            raise ValidationError("at least one seed keyword is required")
        return lex

    def final_trigger_sets(self) -> dict[str, set[str]]:
        return {t: final_triggers(lex) for t, lex in self.lexicons.items()}

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "config": self.config,
            "lexicons": {
                t: {
                    "candidates": [
                        {
                            "word": c.word,
                            "source": list(c.sources),
                            **({"score": c.score} if c.score is not None else {}),
                            "status": c.status,
                        }
                        for c in lex.candidates.values()
                    ]
                }
                for t, lex in self.lexicons.items()
            },
            "audit": self.audit,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Project":
        project = cls(name=data["name"], config=dict(data.get("config", {})))
        for event_type, lex_data in data.get("lexicons", {}).items():
            lex = TriggerLexicon(event_type=event_type)
            for c in lex_data.get("candidates", []):
                lex.candidates[c["word"]] = TriggerCandidate(
                    word=c["word"],
                    sources=list(c["source"]),
                    score=c.get("score"),
                    status=c["status"],
                )
            project.lexicons[event_type] = lex
        project.audit = list(data.get("audit", []))
        return project

    def save(self, path: str | Path) -> None:
        """Atomic write: temp file in the target directory, then rename."""
        path = Path(path)
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self.to_json(), fh, ensure_ascii=False, indent=2)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | Path) -> "Project":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def apply_decision(
    project: Project,
    event_type: str,
    word: str,
    decision: str,
    target: str | None = None,
    _record: bool = True,
) -> None:
    """Record a human curation decision: accept, reject, or move a candidate
    to another event type. Last decision wins; every decision is appended to
    the audit log. Seeds may be rejected, removing them from the final set.
    """
    word = word.lower()
    lex = project.lexicons.get(event_type)
    if lex is None:
        raise ValidationError(f"unknown event type {event_type!r}")
    cand = lex.candidates.get(word)
    if cand is None:
        raise ValidationError(f"no candidate {word!r} under {event_type!r}")
    if decision == "accept":
        cand.status = ACCEPTED
    elif decision == "reject":
        cand.status = REJECTED
    elif decision == "move":
        if not target:
            raise ValidationError("move decision requires a target event type")
        target_lex = project.lexicons.get(target)
        if target_lex is None:
            raise ValidationError(f"unknown target event type {target!r}")
        del lex.candidates[word]
        existing = target_lex.candidates.get(word)
        if existing is None:
            cand.status = ACCEPTED
            target_lex.candidates[word] = cand
        else:
            for src in cand.sources:
                existing.add_source(src, cand.score)
            existing.status = ACCEPTED
    else:
        raise ValidationError(f"unknown decision {decision!r}")
    if _record:
        entry = {
            "ts": datetime.now(timezone.utc).isoformat(),
            "type": event_type,
            "word": word,
            "decision": decision,
        }
        if target:
            entry["target"] = target
        project.audit.append(entry)


def replay_audit(project: Project, audit: list[dict]) -> Project:
    """Re-apply a decision log to a project snapshot (used to verify that
    the persisted log fully determines lexicon state)."""
    for entry in audit:
        apply_decision(
            project,
            entry["type"],
            entry["word"],
            entry["decision"],
            entry.get("target"),
            _record=False,
        )
    return project
