"""HTTP+JSON API over a completed artifact store.

Read endpoints are side-effect free; edits go through a versioned
compare-and-set per set and land in the append-only journal before the set
file and manifest are rewritten.
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse

from . import contours as contours_mod
from .corpus import Corpus, format_timestamp
from .filters import filter_from_params
from .sets import (
    ChallengeSet,
    HISTOGRAM_BINS,
    edit_set,
    export_rows,
    global_familiarity_range,
)
from .store import ArtifactStore, LOG_GRID_FILE, TRAIN_GRID_FILE

import json

import numpy as np


def _record_payload(rec) -> dict:
    return {
        "id": rec.id,
        "origin": rec.origin,
        "source": rec.source_text,
        "translation": rec.translation_text,
        "reference": rec.reference_text,
        "timestamp": format_timestamp(rec.timestamp),
        "provenance": rec.provenance,
        "chrf": rec.chrf,
        "familiarity": rec.familiarity,
        "failed_rules": sorted(rec.failed_rules),
        "topic_id": rec.topic_id,
    }


def _set_summary(cset: ChallengeSet) -> dict:
    m = cset.metrics
    return {
        "set_id": cset.set_id,
        "name": cset.name,
        "kind": cset.kind,
        "version": cset.version,
        "log_count": m.log_count if m else None,
        "train_count": m.train_count if m else None,
        "train_ratio": m.train_ratio if m else None,
        "mean_chrf": m.mean_chrf if m else None,
        "mean_familiarity": m.mean_familiarity if m else None,
        "chrf_histogram": m.chrf_histogram if m else None,
        "familiarity_histogram": m.familiarity_histogram if m else None,
    }


def _grid_contours(grid) -> list[dict]:
    xs, ys = grid.cell_centers()
    levels = contours_mod.contour_levels(grid.values)
    payload = []
    for level in levels:
        polylines = contours_mod.marching_squares(xs, ys, grid.values, level)
        payload.append(
            {"level": level, "polylines": [[[x, y] for x, y in line] for line in polylines]}
        )
    return payload


class ServiceState:
    def __init__(self, store: ArtifactStore):
        store.validate()
        self.store = store
        self.corpus: Corpus = store.load_corpus()
        self.sets: list[ChallengeSet] = store.load_sets()
        self.by_id = {s.set_id: s for s in self.sets}
        self.fa_range = global_familiarity_range(self.corpus)
        self.train_grid = store.load_grid(TRAIN_GRID_FILE)
        self.log_grid = store.load_grid(LOG_GRID_FILE)
        self.edit_lock = threading.Lock()
        self._contour_cache: dict[str, list[dict]] = {}

    def get_set(self, set_id: str) -> ChallengeSet:
        cset = self.by_id.get(set_id)
        if cset is None:
            raise HTTPException(status_code=404, detail=f"unknown set {set_id!r}")
        return cset

    def contours_for(self, which: str) -> list[dict]:
        if which not in self._contour_cache:
            grid = self.train_grid if which == "train" else self.log_grid
            self._contour_cache[which] = _grid_contours(grid)
        return self._contour_cache[which]

    def overlap_members(self, filter_obj) -> Optional[set[str]]:
        if filter_obj.overlap_set is None:
            return None
        other = self.by_id.get(filter_obj.overlap_set)
        if other is None:
            raise HTTPException(
                status_code=400, detail=f"unknown overlap set {filter_obj.overlap_set!r}"
            )
        return set(other.effective_members())


def _filter_params(request: Request) -> dict:
    keys = (
        "time_from", "time_to", "keywords", "kw_mode", "chrf_min", "chrf_max",
        "fa_min", "fa_max", "provenance", "q", "overlap_set",
    )
    return {k: request.query_params.get(k) for k in keys if k in request.query_params}


def create_app(store: ArtifactStore) -> FastAPI:
    state = ServiceState(store)
    app = FastAPI(title="mtriage", version="0.1.0")
    app.state.service = state

    @app.get("/api/sets")
    def list_sets():
        return [_set_summary(s) for s in state.sets]

    @app.get("/api/summary")
    def summary():
        chrf_values = [r.chrf for r in state.corpus.train_records() if r.chrf is not None]
        fa_values = [r.familiarity for r in state.corpus.log_records() if r.familiarity is not None]

        def dist(values, lo, hi):
            if not values:
                return {"count": 0, "min": None, "max": None, "mean": None,
                        "histogram": [0] * HISTOGRAM_BINS, "range": [lo, hi]}
            counts, _ = np.histogram(values, bins=HISTOGRAM_BINS, range=(lo, hi))
            return {
                "count": len(values),
                "min": float(min(values)),
                "max": float(max(values)),
                "mean": float(sum(values) / len(values)),
                "histogram": [int(c) for c in counts],
                "range": [lo, hi],
            }

        return {
            "n_train": state.corpus.n_train,
            "n_log": state.corpus.n_log,
            "n_sets": len(state.sets),
            "chrf": dist(chrf_values, 0.0, 1.0),
            "familiarity": dist(fa_values, state.fa_range[0], state.fa_range[1]),
        }

    @app.get("/api/sets/{set_id}")
    def set_detail(set_id: str):
        cset = state.get_set(set_id)
        payload = _set_summary(cset)
        payload["metrics"] = cset.metrics.to_json_dict() if cset.metrics else None
        payload["keywords"] = [[t, s] for t, s in cset.keywords]
        payload["member_count"] = len(cset.effective_members())
        payload["removed_count"] = len(cset.removed_ids)
        return payload

    @app.get("/api/sets/{set_id}/preview")
    def set_preview(set_id: str):
        cset = state.get_set(set_id)
        sentences = []
        for rid in cset.preview_ids:
            if rid in cset.removed_ids:
                continue
            rec = state.corpus.get(rid)
            sentences.append(
                {"id": rec.id, "origin": rec.origin, "source": rec.source_text,
                 "translation": rec.translation_text}
            )
        return {"set_id": set_id, "sentences": sentences,
                "keywords": [[t, s] for t, s in cset.keywords]}

    @app.get("/api/sets/{set_id}/sentences")
    def set_sentences(
        set_id: str,
        request: Request,
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=100, ge=1, le=1000),
    ):
        cset = state.get_set(set_id)
        try:
            filter_obj = filter_from_params(_filter_params(request))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        overlap = state.overlap_members(filter_obj)
        matched = [
            state.corpus.get(mid)
            for mid in cset.effective_members()
            if filter_obj.matches(state.corpus.get(mid), overlap)
        ]
        start = (page - 1) * page_size
        items = [_record_payload(r) for r in matched[start : start + page_size]]
        return {"total": len(matched), "page": page, "page_size": page_size, "items": items}

    @app.get("/api/sets/{set_id}/embedding")
    def set_embedding(set_id: str):
        cset = state.get_set(set_id)
        points = []
        for mid in cset.effective_members():
            rec = state.corpus.get(mid)
            if rec.projection is None:
                continue
            points.append(
                {"id": rec.id, "x": rec.projection[0], "y": rec.projection[1],
                 "origin": rec.origin, "source": rec.source_text,
                 "translation": rec.translation_text}
            )
        return {
            "set_id": set_id,
            "points": points,
            "contours": {"train": state.contours_for("train"), "log": state.contours_for("log")},
        }

    @app.post("/api/sets/{set_id}/edits")
    def post_edit(set_id: str, body: dict):
        cset = state.get_set(set_id)
        version = body.get("version")
        op = body.get("op")
        if version is None or op is None:
            raise HTTPException(status_code=400, detail="edit needs 'op' and 'version'")
        with state.edit_lock:
            if version != cset.version:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale version {version}, current is {cset.version}",
                )
            try:
                if op == "remove":
                    edit_set(cset, state.corpus, state.sets,
                             remove=body.get("ids") or [], fa_range=state.fa_range)
                elif op == "unremove":
                    edit_set(cset, state.corpus, state.sets,
                             unremove=body.get("ids") or [], fa_range=state.fa_range)
                elif op == "rename":
                    edit_set(cset, state.corpus, state.sets,
                             rename=body.get("name"), fa_range=state.fa_range)
                else:
                    raise HTTPException(status_code=400, detail=f"unknown op {op!r}")
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            state.store.append_journal(set_id, op, {k: v for k, v in body.items()
                                                    if k not in ("version",)}, cset.version)
            state.store.refresh_set(cset, state.sets)
        return {
            "set_id": set_id,
            "version": cset.version,
            "metrics": cset.metrics.to_json_dict(),
            "name": cset.name,
        }

    @app.post("/api/sets/{set_id}/export")
    def post_export(set_id: str, body: Optional[dict] = None):
        body = body or {}
        cset = state.get_set(set_id)
        try:
            filter_obj = filter_from_params(body.get("filters") or {})
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        overlap = state.overlap_members(filter_obj)
        rows = export_rows(cset, state.corpus, filter_obj, overlap)
        text = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)
        if body.get("path"):
            with open(body["path"], "w", encoding="utf-8") as fh:
                fh.write(text)
        return PlainTextResponse(
            text,
            media_type="application/x-ndjson",
            headers={"X-Row-Count": str(len(rows))},
        )

    return app


def serve(store: ArtifactStore, bind_address: str = "127.0.0.1:8000"):
    """Run the API server; blocks until interrupted."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = create_app(store)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
