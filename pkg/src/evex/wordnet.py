"""Reader for WordNet 3.x database files (WNDB format) and hyponym listing.

Only the fields needed for trigger expansion are parsed: synset offsets,
part of speech, lemmas, and pointers. Glosses, frames and morphology are
ignored. Nouns and verbs only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError

NOUN = "n"
VERB = "v"
_POS_FILES = {NOUN: "noun", VERB: "verb"}
HYPONYM_SYMBOLS = ("~", "~i")  # hyponym and instance hyponym


@dataclass(frozen=True)
class Synset:
    offset: int
    pos: str
    lemmas: tuple[str, ...]
    pointers: tuple[tuple[str, int, str], ...]  # (symbol, target offset, target pos)


@dataclass
class WordNetDb:
    synsets: dict[tuple[str, int], Synset] = field(default_factory=dict)
    lemma_index: dict[tuple[str, str], list[int]] = field(default_factory=dict)

    def synsets_for(self, lemma: str, pos: str) -> list[Synset]:
        lemma = lemma.lower().replace(" ", "_")
        return [
            self.synsets[(pos, off)]
            for off in self.lemma_index.get((lemma, pos), [])
        ]


def _is_header(line: str) -> bool:
    return line.startswith("  ") or not line.strip()


def _parse_data_line(line: str, where: str) -> Synset:
    fields = line.split()
    try:
        offset = int(fields[0])
        ss_type = fields[2]
        w_cnt = int(fields[3], 16)
        lemmas = tuple(
            fields[4 + 2 * i].lower() for i in range(w_cnt)
        )
        p_cnt_at = 4 + 2 * w_cnt
        p_cnt = int(fields[p_cnt_at])
        pointers = []
        for i in range(p_cnt):
            base = p_cnt_at + 1 + 4 * i
            symbol, target, target_pos = fields[base], int(fields[base + 1]), fields[base + 2]
            pointers.append((symbol, target, target_pos))
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{where}: malformed synset record: {exc}") from exc
    return Synset(offset=offset, pos=ss_type, lemmas=lemmas, pointers=tuple(pointers))


def _parse_index_line(line: str, where: str) -> tuple[str, list[int]]:
    fields = line.split()
    try:
        lemma = fields[0].lower()
        p_cnt = int(fields[3])
        offsets_at = 4 + p_cnt + 2
        offsets = [int(f) for f in fields[offsets_at:]]
        if not offsets:
            raise ValueError("no synset offsets")
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{where}: malformed index record: {exc}") from exc
    return lemma, offsets


def load_wordnet(directory: str | Path) -> WordNetDb:
    """Load index.{noun,verb} and data.{noun,verb} from a WNDB directory.

    Raises when a file is missing, a record is malformed, or a hyponym
    pointer targets a synset that does not exist.
    """
    directory = Path(directory)
    db = WordNetDb()
    for pos, name in _POS_FILES.items():
        data_path = directory / f"data.{name}"
        index_path = directory / f"index.{name}"
        for p in (data_path, index_path):
            if not p.exists():
                raise ParseError(f"missing WordNet file: {p}")
        with open(data_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if _is_header(line):
                    continue
                syn = _parse_data_line(line, f"{data_path}:{lineno}")
                # ss_type "s" (satellite) never appears in noun/verb files
                db.synsets[(pos, syn.offset)] = syn
        with open(index_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if _is_header(line):
                    continue
                lemma, offsets = _parse_index_line(line, f"{index_path}:{lineno}")
                for off in offsets:
                    if (pos, off) not in db.synsets:
                        raise ValidationError(
                            f"{index_path}:{lineno}: lemma {lemma!r} points to "
                            f"missing synset {off}"
                        )
                db.lemma_index[(lemma, pos)] = offsets
    for (pos, offset), syn in db.synsets.items():
        for symbol, target, target_pos in syn.pointers:
            if symbol in HYPONYM_SYMBOLS and target_pos in _POS_FILES:
                if (target_pos, target) not in db.synsets:
                    raise ValidationError(
                        f"data.{_POS_FILES[pos]}: synset {offset} has hyponym "
                        f"pointer to missing synset {target_pos}{target}"
                    )
    return db


def hyponyms(db: WordNetDb, lemma: str, pos: str, max_depth: int = 1) -> set[str]:
    """All lemmas reachable from the synsets of (lemma, pos) through at most
    max_depth hyponym edges, breadth-first with cycle protection. The query
    lemma itself is excluded; multi-word lemmas come back space-separated.
    An unknown lemma yields an empty set.
    """
    if max_depth < 1:
        raise ValidationError(f"max_depth must be >= 1, got {max_depth}")
    query = lemma.lower().replace(" ", "_")
    frontier = [(pos, s.offset) for s in db.synsets_for(query, pos)]
    visited: set[tuple[str, int]] = set(frontier)
    found: set[str] = set()
    for _ in range(max_depth):
        nxt: list[tuple[str, int]] = []
        for key in frontier:
            for symbol, target, target_pos in db.synsets[key].pointers:
                if symbol not in HYPONYM_SYMBOLS:
                    continue
                tkey = (target_pos, target)
                if tkey in visited or tkey not in db.synsets:
                    continue
                visited.add(tkey)
                nxt.append(tkey)
                found.update(db.synsets[tkey].lemmas)
        frontier = nxt
        if not frontier:
            break
    found.discard(query)
    return {l.replace("_", " ") for l in found}
