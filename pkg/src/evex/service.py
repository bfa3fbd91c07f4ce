"""HTTP backend for the curation board: project state, expansion, decisions,
snippet retrieval, and a synchronous distant-supervision kick.

All mutations funnel through one lock and are persisted atomically (temp
file + rename) before they are acknowledged; a failed write leaves the
in-memory project untouched. Reads never block on corpus scans: the corpus,
embedding table and WordNet database are immutable after startup.
"""
from __future__ import annotations

import copy
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import distsup
from .corpus import Corpus, load_corpus
from .embeddings import EmbeddingTable, load_embeddings, nearest_neighbors
from .errors import ValidationError
from .expansion import ACCEPTED, Project, apply_decision, expand
from .wordnet import WordNetDb, load_wordnet

SNIPPET_CONTEXT = 5  # tokens on each side of a match


class SessionState:
    """Single-writer project session; readers see consistent snapshots
    because every mutation swaps in a fresh Project copy."""

    def __init__(self, project: Project, project_path: Path, corpus: Corpus,
                 table: EmbeddingTable | None, db: WordNetDb | None,
                 out_dir: Path | None = None):
        self.project = project
        self.project_path = project_path
        self.corpus = corpus
        self.table = table
        self.db = db
        self.out_dir = out_dir or project_path.parent
        self.revision = 0
        self._lock = threading.Lock()

    def mutate(self, fn):
        """Apply fn to a copy of the project, persist, then publish. Returns
        (revision, fn's result)."""
        with self._lock:
            draft = copy.deepcopy(self.project)
            result = fn(draft)
            draft.save(self.project_path)
            self.project = draft
            self.revision += 1
            return self.revision, result


class SeedsBody(BaseModel):
    words: list[str]


class TypeBody(BaseModel):
    name: str


class ExpandBody(BaseModel):
    k: int | None = None
    min_sim: float | None = None
    max_depth: int | None = None


class DecisionBody(BaseModel):
    type: str
    word: str
    decision: str
    target: str | None = None


class DistsupBody(BaseModel):
    cap: int = distsup.DEFAULT_CAP
    neg_ratio: float = distsup.DEFAULT_NEGATIVE_RATIO
    seed: int = 0


def _board(state: SessionState) -> dict:
    project = state.project
    columns = []
    for event_type, lexicon in project.lexicons.items():
        columns.append({
            "type": event_type,
            "candidates": [
                {
                    "word": c.word,
                    "source": list(c.sources),
                    "score": c.score,
                    "status": c.status,
                }
                for c in lexicon.candidates.values()
            ],
        })
    return {
        "revision": state.revision,
        "name": project.name,
        "config": project.config,
        "columns": columns,
        "similar": _similar_column(state),
    }


def _similar_column(state: SessionState, per_word: int = 5, limit: int = 20) -> list[dict]:
    """Feed for the leftmost column: neighbors of accepted words that are
    not yet in any lexicon."""
    if state.table is None:
        return []
    known = {
        word
        for lex in state.project.lexicons.values()
        for word in lex.candidates
    }
    out: list[dict] = []
    seen: set[str] = set()
    for lex in state.project.lexicons.values():
        for cand in lex.candidates.values():
            if cand.status != ACCEPTED or " " in cand.word:
                continue
            neighbors = nearest_neighbors(state.table, cand.word, per_word, 0.3)
            for word, score in neighbors or []:
                if word in known or word in seen:
                    continue
                seen.add(word)
                out.append({"word": word, "score": score, "via": cand.word})
                if len(out) >= limit:
                    return out
    return out


def _snippets(state: SessionState, event_type: str, word: str, limit: int) -> list[dict]:
    project = state.project
    lexicon = project.lexicons.get(event_type)
    if lexicon is None:
        raise HTTPException(404, f"unknown event type {event_type!r}")
    if word.lower() not in lexicon.candidates:
        raise HTTPException(404, f"{word!r} is not a candidate of {event_type!r}")
    if limit <= 0:
        return []
    matches = distsup.find_occurrences(state.corpus, {"q": {word}}, cap=limit)
    out = []
    for ex in matches:
        sent = state.corpus.get(ex.doc_id).sentences[ex.sentence]
        lo = max(0, ex.tok_start - SNIPPET_CONTEXT)
        hi = min(len(sent.tokens), ex.tok_end + SNIPPET_CONTEXT)
        snip_start = sent.tokens[lo].start
        out.append({
            "doc_id": ex.doc_id,
            "sentence": ex.sentence,
            "text": sent.text[snip_start : sent.tokens[hi - 1].end],
            "match": {"s": ex.start - snip_start, "e": ex.end - snip_start},
        })
    return out


def create_app(
    project_path: str | Path,
    corpus_path: str | Path,
    embeddings_path: str | Path | None = None,
    wordnet_path: str | Path | None = None,
    out_dir: str | Path | None = None,
) -> FastAPI:
    project_path = Path(project_path)
    project = Project.load(project_path) if project_path.exists() else Project(
        name=project_path.stem
    )
    state = SessionState(
        project=project,
        project_path=project_path,
        corpus=load_corpus(corpus_path),
        table=load_embeddings(embeddings_path) if embeddings_path else None,
        db=load_wordnet(wordnet_path) if wordnet_path else None,
        out_dir=Path(out_dir) if out_dir else None,
    )
    app = FastAPI(title="evex curation service")
    app.state.session = state

    @app.exception_handler(ValidationError)
    def _validation_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/api/board")
    def board():
        return _board(state)

    @app.post("/api/types")
    def add_type(body: TypeBody):
        revision, _ = state.mutate(lambda p: p.add_type(body.name))
        return {"revision": revision}

    @app.delete("/api/types/{name}")
    def delete_type(name: str):
        revision, _ = state.mutate(lambda p: p.remove_type(name))
        return {"revision": revision}

    @app.post("/api/types/{name}/seeds")
    def add_seeds(name: str, body: SeedsBody):
        if not body.words:
            raise HTTPException(400, "words must be non-empty")
        revision, _ = state.mutate(lambda p: p.seed(name, body.words))
        return {"revision": revision, "added": [w.lower() for w in body.words]}

    @app.post("/api/types/{name}/expand")
    def expand_type(name: str, body: ExpandBody):
        config = state.project.config

        def run(project: Project):
            lexicon = project.lexicons.get(name)
            if lexicon is None:
                raise ValidationError(f"unknown event type {name!r}")
            return expand(
                lexicon, state.table, state.db,
                k=body.k if body.k is not None else config.get("k", 20),
                min_sim=body.min_sim if body.min_sim is not None else config.get("min_sim", 0.5),
                max_depth=body.max_depth if body.max_depth is not None else config.get("max_depth", 1),
            )

        revision, summary = state.mutate(run)
        return {
            "revision": revision,
            "added": summary.added,
            "added_embedding": summary.added_embedding,
            "added_wordnet": summary.added_wordnet,
            "oov_seeds": summary.oov_seeds,
            "phrase_seeds_skipped": summary.phrase_seeds_skipped,
        }

    @app.post("/api/decision")
    def decision(body: DecisionBody):
        decision_name = {"accept": "accept", "reject": "reject", "move": "move"}.get(
            body.decision
        )
        if decision_name is None:
            raise HTTPException(400, f"unknown decision {body.decision!r}")
        revision, _ = state.mutate(
            lambda p: apply_decision(p, body.type, body.word, decision_name,
                                     body.target)
        )
        return {"revision": revision}

    @app.get("/api/snippets")
    def snippets(type: str, word: str, limit: int = 10):
        return {"snippets": _snippets(state, type, word, limit)}

    @app.get("/api/sentence")
    def sentence(doc: str, index: int):
        try:
            document = state.corpus.get(doc)
        except KeyError:
            raise HTTPException(404, f"unknown document {doc!r}") from None
        if not (0 <= index < len(document.sentences)):
            raise HTTPException(404, f"document {doc!r} has no sentence {index}")
        sent = document.sentences[index]
        return {
            "doc_id": doc,
            "index": index,
            "text": sent.text,
            "tokens": [{"t": t.text, "s": t.start, "e": t.end} for t in sent.tokens],
        }

    @app.post("/api/distsup")
    def run_distsup(body: DistsupBody):
        lexicons = {
            t: words
            for t, words in state.project.final_trigger_sets().items()
            if words
        }
        if not lexicons:
            raise HTTPException(400, "no accepted triggers in any lexicon")
        positives = distsup.find_occurrences(state.corpus, lexicons, cap=body.cap)
        negatives = distsup.sample_negatives(
            state.corpus, lexicons, body.neg_ratio, body.seed, positives
        )
        out_path = state.out_dir / "examples.jsonl"
        distsup.write_examples(positives + negatives, out_path)
        counts: dict[str, int] = {}
        for ex in positives:
            counts[ex.label] = counts.get(ex.label, 0) + 1
        counts[distsup.NONE_LABEL] = len(negatives)
        return {"revision": state.revision, "path": str(out_path), "counts": counts}

    @app.get("/api/similar")
    def similar(word: str, k: int = 10):
        if state.table is None:
            return {"word": word, "oov": True, "neighbors": []}
        neighbors = nearest_neighbors(state.table, word, k, min_sim=-1.0)
        if neighbors is None:
            return {"word": word, "oov": True, "neighbors": []}
        return {
            "word": word,
            "oov": False,
            "neighbors": [{"word": w, "score": s} for w, s in neighbors],
        }

    return app


def serve(
    project_path: str | Path,
    corpus_path: str | Path,
    embeddings_path: str | Path | None = None,
    wordnet_path: str | Path | None = None,
    port: int = 8040,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(project_path, corpus_path, embeddings_path, wordnet_path)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="info")
