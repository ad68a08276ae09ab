"""HTTP layer for rating sessions, plus static hosting of the rater UI.

Routes:
    POST /sessions                  create (idempotent for identical input)
    GET  /sessions/{sid}/next       next unrated item for ?rater=
    POST /ratings                   submit one fluency/adequacy pair
    POST /sessions/{sid}/finalize   close the session, return unblinded export
    GET  /sessions/{sid}/export     the same export; 409 until finalized

Until finalize, no response body contains run/scenario identifiers — raters
only ever see opaque item keys.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .. import corpus, scenarios
from ..errors import CascadekitError
from .store import (
    AnnotateStore,
    CoverageMismatch,
    DuplicateRating,
    ItemMeta,
    OutOfRange,
    SessionFinalized,
    UnknownItemKey,
    UnknownSession,
    meta_from_items,
)


class CreateSessionBody(BaseModel):
    seed: int
    run_dirs: Optional[list[str]] = None
    runs: Optional[dict[str, dict[str, str]]] = None
    manifest: Optional[str] = None
    items: Optional[list[dict]] = None
    session_id: Optional[str] = None


class RatingBody(BaseModel):
    session_id: str
    rater: str
    item_key: str
    fluency: int
    adequacy: int


def _http_error(exc: CascadekitError) -> HTTPException:
    if isinstance(exc, (UnknownSession, UnknownItemKey)):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, (DuplicateRating, SessionFinalized)):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, (OutOfRange, CoverageMismatch)):
        return HTTPException(status_code=400, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def _load_run_dirs(run_dirs: list[str]) -> dict[str, dict[str, str]]:
    hyps: dict[str, dict[str, str]] = {}
    for run_dir in run_dirs:
        config_path = Path(run_dir) / "config.json"
        name = json.loads(config_path.read_text(encoding="utf-8"))["name"]
        traces = scenarios.load_traces(run_dir)
        if name in hyps:
            raise CoverageMismatch(f"two runs named {name!r}")
        hyps[name] = {t.item_id: t.hypothesis for t in traces}
    return hyps


def _inline_meta(items: list[dict]) -> dict[str, ItemMeta]:
    meta = {}
    for record in items:
        meta[record["id"]] = ItemMeta(
            source_text=record["source_text"],
            reference_text=record["reference_text"],
            sentence_type=record.get("sentence_type", "statement"),
        )
    return meta


def create_app(store: AnnotateStore, ui_dir: Optional[str | Path] = None) -> FastAPI:
    app = FastAPI(title="cascadekit annotate", docs_url=None, redoc_url=None)

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            if body.run_dirs:
                hyps = _load_run_dirs(body.run_dirs)
            elif body.runs:
                hyps = body.runs
            else:
                raise CoverageMismatch("provide run_dirs or inline runs")
            if body.manifest:
                meta = meta_from_items(corpus.load_manifest(body.manifest))
            elif body.items:
                meta = _inline_meta(body.items)
            else:
                raise CoverageMismatch("provide manifest path or inline items")
            session = store.create_session(hyps, meta, body.seed, body.session_id)
        except CascadekitError as exc:
            raise _http_error(exc) from exc
        return {"session_id": session.id, "n_items": len(session.items)}

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str, rater: str = Query(min_length=1)):
        try:
            item, rated, total = store.next_item(session_id, rater)
        except CascadekitError as exc:
            raise _http_error(exc) from exc
        if item is None:
            return {"done": True, "rated": rated, "total": total}
        return {
            "done": False,
            "item": {
                "item_key": item.item_key,
                "source_text": item.source_text,
                "reference_text": item.reference_text,
                "hypothesis_text": item.hypothesis_text,
                "position": rated,
                "total": total,
            },
        }

    @app.post("/ratings")
    def submit_rating(body: RatingBody):
        try:
            record, was_new = store.submit_rating(
                body.session_id, body.rater, body.item_key, body.fluency, body.adequacy
            )
        except CascadekitError as exc:
            raise _http_error(exc) from exc
        return {"ok": True, "duplicate": not was_new}

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        try:
            return store.finalize(session_id)
        except CascadekitError as exc:
            raise _http_error(exc) from exc

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        try:
            return store.export(session_id)
        except CascadekitError as exc:
            raise _http_error(exc) from exc

    if ui_dir is not None:
        ui_path = Path(ui_dir)
        index = ui_path / "index.html"

        @app.get("/", include_in_schema=False)
        def root():
            return FileResponse(index)

        app.mount("/ui", StaticFiles(directory=ui_path), name="ui")

    return app
