import json
from pathlib import Path

import pytest

from evex.corpus import (
    Corpus,
    Document,
    GoldArgument,
    GoldTrigger,
    Mention,
    Sentence,
    tokenize,
)

S1_TEXT = "21 people were wounded in Tuesday's southern Philippines airport blast."


def make_sentence(
    text: str,
    mentions: list[Mention] | None = None,
    gold_triggers: list[GoldTrigger] | None = None,
    gold_args: list[GoldArgument] | None = None,
) -> Sentence:
    return Sentence(
        text=text,
        tokens=tokenize(text),
        mentions=mentions or [],
        gold_triggers=gold_triggers,
        gold_args=gold_args,
    )


@pytest.fixture
def s1_sentence() -> Sentence:
    # "wounded" at (15, 22), "blast" at (65, 70)
    # mentions "21 people" (0, 9) and "airport" (57, 64)
    return make_sentence(
        S1_TEXT,
        mentions=[
            Mention(0, 9, "entity", "PER"),
            Mention(57, 64, "entity", "FAC"),
        ],
        gold_triggers=[GoldTrigger(15, 22, "Injury"), GoldTrigger(65, 70, "Attack")],
        gold_args=[
            GoldArgument(15, 22, 0, 9, "Victim"),
            GoldArgument(15, 22, 57, 64, "Place"),
            GoldArgument(65, 70, 0, 9, "Target"),
            GoldArgument(65, 70, 57, 64, "Place"),
        ],
    )


@pytest.fixture
def s1_corpus(s1_sentence) -> Corpus:
    return Corpus([Document(doc_id="d1", sentences=[s1_sentence])])


def corpus_of_texts(texts_by_doc: dict[str, list[str]]) -> Corpus:
    docs = [
        Document(doc_id=doc_id, sentences=[make_sentence(t) for t in texts])
        for doc_id, texts in texts_by_doc.items()
    ]
    return Corpus(docs)


def write_embeddings_file(path: Path, rows: dict[str, list[float]],
                          header: bool = False) -> Path:
    lines = []
    if header:
        dim = len(next(iter(rows.values())))
        lines.append(f"{len(rows)} {dim}")
    for word, vec in rows.items():
        lines.append(word + " " + " ".join(str(v) for v in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


WN_LICENSE = (
    "  1 This file is a hand-built fixture in WNDB layout.\n"
    "  2 Lines starting with two spaces are skipped by the loader.\n"
)


def write_wordnet_dir(dirpath: Path, synsets: dict[str, dict]) -> Path:
    """Build a WNDB directory from {pos: {offset: (lemmas, pointers)}} where
    pointers are (symbol, target_offset, target_pos) triples."""
    dirpath.mkdir(parents=True, exist_ok=True)
    for pos, name in (("n", "noun"), ("v", "verb")):
        data_lines = [WN_LICENSE.rstrip("\n")]
        index: dict[str, list[int]] = {}
        for offset, (lemmas, pointers) in sorted(synsets.get(pos, {}).items()):
            words = " ".join(f"{lemma} 0" for lemma in lemmas)
            ptrs = " ".join(
                f"{sym} {tgt:08d} {tpos} 0000" for sym, tgt, tpos in pointers
            )
            line = (
                f"{offset:08d} 03 {pos} {len(lemmas):02x} {words} "
                f"{len(pointers):03d}"
            )
            if ptrs:
                line += " " + ptrs
            line += " | fixture gloss"
            data_lines.append(line)
            for lemma in lemmas:
                index.setdefault(lemma, []).append(offset)
        index_lines = [WN_LICENSE.rstrip("\n")]
        for lemma, offsets in sorted(index.items()):
            offs = " ".join(f"{o:08d}" for o in offsets)
            index_lines.append(f"{lemma} {pos} {len(offsets)} 0 {len(offsets)} 0 {offs}")
        (dirpath / f"data.{name}").write_text("\n".join(data_lines) + "\n")
        (dirpath / f"index.{name}").write_text("\n".join(index_lines) + "\n")
    return dirpath


@pytest.fixture
def attack_wordnet(tmp_path) -> Path:
    return write_wordnet_dir(
        tmp_path / "wn",
        {
            "n": {
                1740: (["attack"], [("~", 1741, "n")]),
                1741: (["ambush"], []),
            },
            "v": {},
        },
    )


def write_corpus_file(path: Path, corpus: Corpus) -> Path:
    from evex.corpus import write_corpus

    write_corpus(corpus, path)
    return path


INJURY_ACTORS = ["rebels", "soldiers", "police"]
INJURY_VICTIMS = ["villagers", "farmers", "guards"]
ATTACK_TARGETS = ["convoy", "market", "bridge"]
PLACES = ["katanga", "mombasa", "bondo"]
DAYS = ["monday", "tuesday", "friday"]
FILLER_VERBS = ["sold", "bought", "carried"]


def _span(text: str, word: str) -> tuple[int, int]:
    i = text.index(word)
    return i, i + len(word)


def annotated_fixture_corpus(n_docs: int = 16) -> Corpus:
    """Small fully-annotated corpus cycling Injury / Attack / no-event
    sentences with entity and time mentions and raw (pre-mapping) roles."""
    docs = []
    for i in range(n_docs):
        place, day = PLACES[i % 3], DAYS[(i + 1) % 3]
        kind = i % 3
        if kind == 0:
            actor, victim = INJURY_ACTORS[i % 3], INJURY_VICTIMS[(i + 1) % 3]
            text = f"{actor} wounded {victim} in {place} on {day}"
            trigger = _span(text, "wounded")
            gold_triggers = [GoldTrigger(*trigger, "Injury")]
            mentions = [
                Mention(*_span(text, actor), "entity", "PER"),
                Mention(*_span(text, victim), "entity", "PER"),
                Mention(*_span(text, place), "entity", "LOC"),
                Mention(*_span(text, day), "time", "DATE"),
            ]
            gold_args = [
                GoldArgument(*trigger, *_span(text, actor), "Agent"),
                GoldArgument(*trigger, *_span(text, victim), "Victim"),
                GoldArgument(*trigger, *_span(text, place), "Place"),
                GoldArgument(*trigger, *_span(text, day), "Time"),
            ]
        elif kind == 1:
            target = ATTACK_TARGETS[i % 3]
            text = f"a blast hit the {target} in {place} on {day}"
            trigger = _span(text, "blast")
            gold_triggers = [GoldTrigger(*trigger, "Attack")]
            mentions = [
                Mention(*_span(text, target), "entity", "FAC"),
                Mention(*_span(text, place), "entity", "LOC"),
                Mention(*_span(text, day), "time", "DATE"),
            ]
            gold_args = [
                GoldArgument(*trigger, *_span(text, target), "Target"),
                GoldArgument(*trigger, *_span(text, place), "Place"),
                GoldArgument(*trigger, *_span(text, day), "Time"),
            ]
        else:
            actor = INJURY_ACTORS[(i + 2) % 3]
            verb = FILLER_VERBS[i % 3]
            text = f"{actor} {verb} fruit in {place} on {day}"
            gold_triggers = []
            mentions = [
                Mention(*_span(text, actor), "entity", "PER"),
                Mention(*_span(text, place), "entity", "LOC"),
                Mention(*_span(text, day), "time", "DATE"),
            ]
            gold_args = []
        docs.append(Document(
            doc_id=f"doc{i:03d}",
            sentences=[Sentence(
                text=text, tokens=tokenize(text), mentions=mentions,
                gold_triggers=gold_triggers, gold_args=gold_args,
            )],
        ))
    return Corpus(docs)


FIXTURE_EMBEDDINGS = {
    "wounded": [1.0, 0.1, 0.0, 0.1],
    "injured": [0.97, 0.15, 0.05, 0.1],
    "hurt": [0.93, 0.2, 0.02, 0.1],
    "blast": [0.1, 1.0, 0.05, 0.0],
    "explosion": [0.12, 0.97, 0.1, 0.0],
    "bombing": [0.05, 0.93, 0.15, 0.0],
    "fruit": [0.0, 0.0, 1.0, 0.2],
    "market": [0.1, 0.0, 0.9, 0.3],
    "monday": [0.0, 0.1, 0.2, 1.0],
    "tuesday": [0.05, 0.1, 0.15, 0.97],
}

FIXTURE_WORDNET = {
    "n": {
        100: (["blast"], [("~", 101, "n")]),
        101: (["airburst"], []),
    },
    "v": {
        200: (["wound"], [("~", 201, "v")]),
        201: (["maim"], []),
    },
}

SMALL_GRID_JSON = {
    "epochs": [10],
    "pos_weights": [3.0],
    "batch_sizes": [8],
    "filter_counts": [4],
    "d_word": 8,
}


def build_pipeline_fixture(root: Path, n_docs: int = 16) -> dict[str, Path]:
    """Write corpus, embeddings, wordnet, seeded project, and grid files for
    end-to-end CLI runs. Everything is deterministic."""
    from evex.corpus import write_corpus
    from evex.expansion import Project

    root.mkdir(parents=True, exist_ok=True)
    corpus_path = root / "corpus.jsonl"
    write_corpus(annotated_fixture_corpus(n_docs), corpus_path)
    emb_path = write_embeddings_file(root / "embeddings.txt", FIXTURE_EMBEDDINGS)
    wn_path = write_wordnet_dir(root / "wordnet", FIXTURE_WORDNET)
    project = Project(name="fixture")
    project.seed("Injury", ["wounded"])
    project.seed("Attack", ["blast"])
    project_path = root / "project.json"
    project.save(project_path)
    grid_path = root / "grid.json"
    grid_path.write_text(json.dumps(SMALL_GRID_JSON))
    grouping_path = root / "grouping.json"
    grouping_path.write_text(json.dumps({"Injury": "harm", "Attack": "conflict"}))
    return {
        "root": root,
        "corpus": corpus_path,
        "embeddings": emb_path,
        "wordnet": wn_path,
        "project": project_path,
        "grid": grid_path,
        "grouping": grouping_path,
    }


def run_cli_chain(fixture: dict[str, Path], tag: str) -> dict[str, bytes]:
    """Full expand -> distsup -> split -> train -> predict -> score chain via
    the CLI with fixed seeds; returns the bytes of every produced file."""
    from evex.cli import main

    def run(*argv):
        code = main([str(a) for a in argv])
        assert code == 0, f"stage failed: {argv[0]}"

    root = fixture["root"]
    examples = root / f"examples-{tag}.jsonl"
    split = root / f"split-{tag}.json"
    model = root / f"model-{tag}.json"
    pred = root / f"pred-{tag}.jsonl"
    report = root / f"report-{tag}.json"
    run("expand", "--project", fixture["project"],
        "--embeddings", fixture["embeddings"], "--wordnet", fixture["wordnet"],
        "--k", 3)
    run("distsup", "--project", fixture["project"], "--corpus", fixture["corpus"],
        "--cap", 60, "--neg-ratio", 2.0, "--seed", 7, "--out", examples)
    run("split", "--corpus", fixture["corpus"], "--ratios", "0.6,0.2,0.2",
        "--seed", 7, "--out", split)
    run("train-trigger", "--examples", examples, "--split", split,
        "--embeddings", fixture["embeddings"], "--grid", fixture["grid"],
        "--seed", 7, "--out", model)
    run("predict", "--model", model, "--corpus", fixture["corpus"], "--out", pred)
    run("score", "--pred", pred, "--gold", fixture["corpus"], "--mode", "trigger",
        "--out", report)
    return {
        "examples": examples.read_bytes(),
        "model": model.read_bytes(),
        "pred": pred.read_bytes(),
        "report": report.read_bytes(),
        "project": Path(fixture["project"]).read_bytes(),
    }


def s1_jsonl_line() -> str:
    sent = {
        "text": S1_TEXT,
        "tokens": [
            {"t": t.text, "s": t.start, "e": t.end} for t in tokenize(S1_TEXT)
        ],
        "mentions": [
            {"s": 0, "e": 9, "kind": "entity", "label": "PER"},
            {"s": 57, "e": 64, "kind": "entity", "label": "FAC"},
        ],
        "gold_triggers": [
            {"s": 15, "e": 22, "type": "Injury"},
            {"s": 65, "e": 70, "type": "Attack"},
        ],
        "gold_args": [
            {"trigger_s": 15, "trigger_e": 22, "s": 0, "e": 9, "role": "Victim"},
            {"trigger_s": 65, "trigger_e": 70, "s": 57, "e": 64, "role": "Place"},
        ],
    }
    return json.dumps({"doc_id": "d1", "sentences": [sent]})
