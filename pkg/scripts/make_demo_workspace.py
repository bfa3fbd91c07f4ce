#!/usr/bin/env python3
"""Generate a self-contained demo workspace: a synthetic annotated corpus,
a WNDB-format WordNet fixture, a seeded curation project, a hyperparameter
grid, a role grouping, and experiment-arm configs.

Usage: python3 scripts/make_demo_workspace.py [workdir]
"""
import json
import random
import sys
from pathlib import Path

from evex.corpus import (
    Corpus, Document, GoldArgument, GoldTrigger, Mention, Sentence,
    tokenize, write_corpus,
)
from evex.expansion import Project

INJURY = {
    "actors": ["rebels", "soldiers", "police", "militia"],
    "verbs": ["wounded", "injured", "hurt"],
    "victims": ["villagers", "farmers", "guards", "traders"],
}
ATTACK = {
    "nouns": ["blast", "explosion", "bombing", "raid"],
    "targets": ["convoy", "market", "bridge", "depot"],
}
DEMO = {
    "verbs": ["marched", "rallied", "protested"],
    "crowds": ["workers", "students", "nurses"],
}
PLACES = ["katanga", "mombasa", "bondo", "kisumu"]
DAYS = ["monday", "tuesday", "friday", "sunday"]
FILLER = [
    "traders sold fruit near the station",
    "the river rose slowly last week",
    "children played football after school",
]


def span(text, word):
    i = text.index(word)
    return i, i + len(word)


def sentence(text, mentions=(), triggers=(), args=()):
    return Sentence(
        text=text,
        tokens=tokenize(text),
        mentions=list(mentions),
        gold_triggers=list(triggers),
        gold_args=list(args),
    )


def build_corpus(n_docs: int, seed: int) -> Corpus:
    rng = random.Random(seed)
    docs = []
    for i in range(n_docs):
        place, day = rng.choice(PLACES), rng.choice(DAYS)
        kind = i % 4
        if kind == 0:
            actor = rng.choice(INJURY["actors"])
            verb = rng.choice(INJURY["verbs"])
            victim = rng.choice(INJURY["victims"])
            text = f"{actor} {verb} {victim} in {place} on {day}"
            trig = span(text, verb)
            sent = sentence(
                text,
                mentions=[
                    Mention(*span(text, actor), "entity", "PER"),
                    Mention(*span(text, victim), "entity", "PER"),
                    Mention(*span(text, place), "entity", "LOC"),
                    Mention(*span(text, day), "time", "DATE"),
                ],
                triggers=[GoldTrigger(*trig, "Injury")],
                args=[
                    GoldArgument(*trig, *span(text, actor), "Agent"),
                    GoldArgument(*trig, *span(text, victim), "Victim"),
                    GoldArgument(*trig, *span(text, place), "Place"),
                    GoldArgument(*trig, *span(text, day), "Time"),
                ],
            )
        elif kind == 1:
            noun = rng.choice(ATTACK["nouns"])
            target = rng.choice(ATTACK["targets"])
            text = f"a {noun} hit the {target} in {place} on {day}"
            trig = span(text, noun)
            sent = sentence(
                text,
                mentions=[
                    Mention(*span(text, target), "entity", "FAC"),
                    Mention(*span(text, place), "entity", "LOC"),
                    Mention(*span(text, day), "time", "DATE"),
                ],
                triggers=[GoldTrigger(*trig, "Attack")],
                args=[
                    GoldArgument(*trig, *span(text, target), "Target"),
                    GoldArgument(*trig, *span(text, place), "Place"),
                    GoldArgument(*trig, *span(text, day), "Time"),
                ],
            )
        elif kind == 2:
            verb = rng.choice(DEMO["verbs"])
            crowd = rng.choice(DEMO["crowds"])
            text = f"{crowd} {verb} in {place} on {day}"
            trig = span(text, verb)
            sent = sentence(
                text,
                mentions=[
                    Mention(*span(text, crowd), "entity", "PER"),
                    Mention(*span(text, place), "entity", "LOC"),
                    Mention(*span(text, day), "time", "DATE"),
                ],
                triggers=[GoldTrigger(*trig, "Demonstration")],
                args=[
                    GoldArgument(*trig, *span(text, crowd), "Entity"),
                    GoldArgument(*trig, *span(text, place), "Place"),
                    GoldArgument(*trig, *span(text, day), "Time"),
                ],
            )
        else:
            text = rng.choice(FILLER)
            sent = sentence(text)
            sent.gold_triggers = []
            sent.gold_args = []
        docs.append(Document(doc_id=f"doc{i:04d}", sentences=[sent]))
    return Corpus(docs)


WORDNET_FIXTURE = {
    "noun": {
        100: (["blast"], [("~", 101, "n"), ("~", 102, "n")]),
        101: (["airburst"], []),
        102: (["detonation"], []),
        110: (["raid"], [("~", 111, "n")]),
        111: (["foray"], []),
    },
    "verb": {
        200: (["wound"], [("~", 201, "v")]),
        201: (["maim"], []),
        210: (["march"], [("~", 211, "v")]),
        211: (["parade"], []),
    },
}

LICENSE = (
    "  1 Demo fixture in WNDB layout; header lines start with two spaces.\n"
)


def write_wordnet(dirpath: Path) -> None:
    dirpath.mkdir(parents=True, exist_ok=True)
    for name, pos in (("noun", "n"), ("verb", "v")):
        synsets = WORDNET_FIXTURE[name]
        data_lines, index = [LICENSE.rstrip("\n")], {}
        for offset, (lemmas, pointers) in sorted(synsets.items()):
            words = " ".join(f"{lemma} 0" for lemma in lemmas)
            ptrs = " ".join(f"{s} {t:08d} {p} 0000" for s, t, p in pointers)
            line = f"{offset:08d} 03 {pos} {len(lemmas):02x} {words} {len(pointers):03d}"
            if ptrs:
                line += " " + ptrs
            data_lines.append(line + " | demo gloss")
            for lemma in lemmas:
                index.setdefault(lemma, []).append(offset)
        index_lines = [LICENSE.rstrip("\n")]
        for lemma, offsets in sorted(index.items()):
            offs = " ".join(f"{o:08d}" for o in offsets)
            index_lines.append(
                f"{lemma} {pos} {len(offsets)} 0 {len(offsets)} 0 {offs}"
            )
        (dirpath / f"data.{name}").write_text("\n".join(data_lines) + "\n")
        (dirpath / f"index.{name}").write_text("\n".join(index_lines) + "\n")


def main() -> int:
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo")
    workdir.mkdir(parents=True, exist_ok=True)

    corpus = build_corpus(n_docs=80, seed=11)
    write_corpus(corpus, workdir / "corpus.jsonl")
    write_wordnet(workdir / "wordnet")

    project = Project(name="demo")
    project.seed("Injury", ["wounded"])
    project.seed("Attack", ["blast", "raid"])
    project.seed("Demonstration", ["marched"])
    project.save(workdir / "project.json")

    (workdir / "grid.json").write_text(json.dumps({
        "epochs": [10, 20],
        "pos_weights": [3.0],
        "batch_sizes": [8],
        "filter_counts": [8],
        "d_word": 16,
    }, indent=2))
    (workdir / "grouping.json").write_text(json.dumps({
        "Injury": "harm", "Attack": "conflict", "Demonstration": "civil",
    }, indent=2))
    (workdir / "arm-trigger.json").write_text(json.dumps({
        "mode": "trigger",
        "corpus": str(workdir / "corpus.jsonl"),
        "project": str(workdir / "project.json"),
        "embeddings": str(workdir / "embeddings.txt"),
        "cap": 60, "neg_ratio": 2.0, "seed": 7,
        "grid": json.loads((workdir / "grid.json").read_text()),
        "arms": ["distant", "adjudicated", "downsampled"],
        "out": str(workdir / "report-trigger-arms.json"),
    }, indent=2))
    (workdir / "arm-argument.json").write_text(json.dumps({
        "mode": "argument",
        "corpus": str(workdir / "corpus.jsonl"),
        "embeddings": str(workdir / "embeddings.txt"),
        "grouping": str(workdir / "grouping.json"),
        "seed": 7,
        "grid": json.loads((workdir / "grid.json").read_text()),
        "arms": ["normal-mapped", "pre-mapped", "leave-one-out"],
        "out": str(workdir / "report-argument-arms.json"),
    }, indent=2))
    print(f"demo workspace ready in {workdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
