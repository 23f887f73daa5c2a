"""HTTP service exposing panel-ready data.

Thin controllers only: every endpoint body is a direct in-process module call
serialized through one canonical JSON encoder, so responses are byte-stable
for identical store state and query. Twin pose seeds derive from the speech
id, never from global randomness.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from pathlib import Path
from typing import Mapping, Sequence

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles

from .bundle import bundle_from_doc, slice_bundle
from .corpus import CorpusSpeech
from .effectiveness import (
    EffectivenessModel,
    aggregate_score,
    effectiveness_curve,
    factor_histogram,
    model_to_doc,
)
from .errors import EmptyCorpus
from .errors import PodiumError, RangeError, SchemaError
from .factors import ALL_FACTORS, FactorId, FactorVector, compute_factors
from .recommend import query_from_doc, recommend, result_to_doc
from .store import CorpusStore, meta_to_doc
from .summarize import (
    encodings_doc,
    overlay_to_doc,
    overlay_trail,
    slices_to_doc,
    speech_twin,
    time_slices,
    twin_to_doc,
)

SCHEMA_VERSION = 1


def canonical_json(payload: Mapping) -> bytes:
    return json.dumps(payload, separators=(",", ":"), allow_nan=False).encode()


def pose_seed_for(speech_id: str) -> int:
    """Stable per-speech seed: twins are deterministic across calls and hosts."""
    return int.from_bytes(hashlib.sha256(speech_id.encode()).digest()[:4], "big")


def _versioned(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def factors_payload(speech_id: str, fv: FactorVector, model: EffectivenessModel,
                    span: tuple[float, float] | None) -> dict:
    factors = {}
    for f in ALL_FACTORS:
        entry = fv[f]
        score = model.score(f, entry.value) if entry.value is not None else None
        factors[f.id] = {
            "value": entry.value,
            "coverage": entry.coverage,
            "technique": f.technique.value,
            "feature": f.feature,
            "statistic": f.statistic.value,
            "score": None if score is None else {
                "class_probs": list(score.class_probs),
                "expected_class": score.expected_class,
                "significant": score.significant,
                "gray": not score.significant,
                "label": score.label,
            },
        }
    return _versioned({
        "speech_id": speech_id,
        "span": None if span is None else {"start_s": span[0], "end_s": span[1]},
        "factors": factors,
    })


def sentence_scores_for(entry: CorpusSpeech, model: EffectivenessModel,
                        selected: Sequence[FactorId] | None) -> dict[int, float | None]:
    return {s.index: aggregate_score(model, s.factors, selected) for s in entry.sentences}


def _parse_span(speech_meta, start: float | None, end: float | None) -> tuple[float, float] | None:
    if start is None and end is None:
        return None
    lo = 0.0 if start is None else float(start)
    hi = speech_meta.duration_s if end is None else float(end)
    if not 0.0 <= lo < hi <= speech_meta.duration_s:
        raise RangeError(f"span [{lo}, {hi}) outside [0, {speech_meta.duration_s}] or empty")
    return lo, hi


def _parse_factor_list(raw: str | None) -> tuple[FactorId, ...]:
    if not raw:
        return ()
    try:
        return tuple(FactorId.from_id(tok) for tok in raw.split(",") if tok)
    except KeyError as e:
        raise SchemaError("factors", str(e)) from e


def create_app(store: CorpusStore, model: EffectivenessModel, *,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="podium", docs_url=None, redoc_url=None)

    @app.exception_handler(PodiumError)
    async def podium_error_handler(_: Request, exc: PodiumError):
        return Response(
            content=canonical_json(_versioned({
                "error": {"code": exc.code, "message": str(exc)},
            })),
            status_code=exc.http_status,
            media_type="application/json",
        )

    def respond(payload: dict) -> Response:
        return Response(content=canonical_json(payload), media_type="application/json")

    @app.get("/api/speeches")
    def list_speeches():
        snap = store.snapshot()
        return respond(_versioned({
            "speeches": [meta_to_doc(e.meta) for e in snap.speeches()],
        }))

    @app.get("/api/speeches/{speech_id}/factors")
    def speech_factors(speech_id: str, start: float | None = None, end: float | None = None):
        snap = store.snapshot()
        entry = snap.speech(speech_id)
        span = _parse_span(entry.meta, start, end)
        if span is None:
            fv = entry.factors
        else:
            fv = compute_factors(slice_bundle(snap.bundle(speech_id), *span))
        return respond(factors_payload(speech_id, fv, model, span))

    @app.get("/api/speeches/{speech_id}/slices")
    def speech_slices(speech_id: str, start: float | None = None, end: float | None = None,
                      factors: str | None = None):
        snap = store.snapshot()
        entry = snap.speech(speech_id)
        span = _parse_span(entry.meta, start, end)
        bundle = snap.bundle(speech_id)
        view = bundle.view() if span is None else slice_bundle(bundle, *span)
        selected = _parse_factor_list(factors) or None
        scores = sentence_scores_for(entry, model, selected)
        doc = slices_to_doc(time_slices(view, sentence_scores=scores))
        return respond(_versioned({"speech_id": speech_id, **doc}))

    @app.get("/api/speeches/{speech_id}/twin")
    def speech_twin_endpoint(speech_id: str, start: float | None = None, end: float | None = None,
                             factors: str | None = None):
        snap = store.snapshot()
        entry = snap.speech(speech_id)
        span = _parse_span(entry.meta, start, end)
        bundle = snap.bundle(speech_id)
        view = bundle.view() if span is None else slice_bundle(bundle, *span)
        twin = speech_twin(view, pose_seed=pose_seed_for(speech_id))
        if span is None:
            fv = entry.factors
        else:
            fv = compute_factors(view)
        selected = _parse_factor_list(factors)
        return respond(_versioned({
            "speech_id": speech_id,
            "span": None if span is None else {"start_s": span[0], "end_s": span[1]},
            "twin": twin_to_doc(twin),
            "factor_values": {f.id: fv.value(f) for f in selected},
        }))

    @app.post("/api/recommend")
    async def recommend_endpoint(request: Request):
        try:
            body = json.loads(await request.body())
            query = query_from_doc(body)
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
            raise SchemaError("$", f"bad recommendation query: {e}") from e
        snap = store.snapshot()
        result = recommend(query, snap)
        payload = result_to_doc(result)
        for cand, doc in zip(result.candidates, payload["candidates"]):
            bundle = snap.bundle(cand.speech_id)
            lo = max(0.0, cand.start_s)
            hi = min(bundle.meta.duration_s, cand.end_s)
            view = slice_bundle(bundle, lo, hi) if lo < hi else bundle.view()
            doc["twin"] = twin_to_doc(speech_twin(view, pose_seed=pose_seed_for(cand.speech_id)))
            doc["level"] = bundle.meta.level
            doc["title"] = bundle.meta.title
        return respond(_versioned(payload))

    @app.get("/api/speeches/{speech_id}/overlay")
    def overlay_endpoint(speech_id: str, t: float, interval: float = 1.0, n: int = 10):
        snap = store.snapshot()
        bundle = snap.bundle(speech_id)
        trail = overlay_trail(bundle, t, n=n, interval_s=interval)
        return respond(_versioned({"speech_id": speech_id, **overlay_to_doc(trail)}))

    @app.get("/api/factors/{factor_id}/board")
    def factor_board(factor_id: str, speech_id: str, start: float | None = None,
                     end: float | None = None, bins: int = 16, points: int = 41):
        """Hover-board data: effectiveness curve over the corpus range, the
        corpus histogram with the analyzed speech highlighted, and the all- /
        best-speech averages for the factor."""
        try:
            fid = FactorId.from_id(factor_id)
        except KeyError as e:
            raise SchemaError("factor_id", str(e)) from e
        snap = store.snapshot()
        entry = snap.speech(speech_id)
        span = _parse_span(entry.meta, start, end)
        if span is None:
            value = entry.factors.value(fid)
        else:
            value = compute_factors(slice_bundle(snap.bundle(speech_id), *span)).value(fid)

        corpus_values = [e.factors.value(fid) for e in snap.speeches()]
        defined = [v for v in corpus_values if v is not None]
        best_level = max((e.meta.level for e in snap.speeches()), default=None)
        best_values = [
            e.factors.value(fid) for e in snap.speeches()
            if e.meta.level == best_level and e.factors.value(fid) is not None
        ]

        hist_doc = None
        try:
            h = factor_histogram(defined, bins=bins, highlight=value)
            hist_doc = {"edges": list(h.edges), "counts": list(h.counts),
                        "highlight_bin": h.highlight_bin}
        except EmptyCorpus:
            pass

        curve_doc = None
        coeffs = model.coefficients.get(fid)
        if coeffs is not None:
            pool = defined + ([value] if value is not None else [])
            if pool:
                lo, hi = min(pool), max(pool)
                if hi - lo <= 0:
                    lo, hi = lo - 0.5, hi + 0.5
                curve_doc = [[x, y] for x, y in effectiveness_curve(coeffs, (lo, hi), points)]

        return respond(_versioned({
            "factor": fid.id,
            "speech_id": speech_id,
            "value": value,
            "curve": curve_doc,
            "histogram": hist_doc,
            "corpus_mean": float(np.mean(defined)) if defined else None,
            "best_mean": float(np.mean(best_values)) if best_values else None,
            "best_level": best_level,
        }))

    @app.get("/api/model")
    def model_endpoint():
        return respond(_versioned({"model": model_to_doc(model)}))

    @app.get("/api/encodings")
    def encodings_endpoint():
        return respond(_versioned(encodings_doc()))

    @app.post("/api/ingest")
    async def ingest_endpoint(request: Request, force: bool = False):
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"invalid JSON: {e.msg}") from e
        bundle = bundle_from_doc(doc)
        speech_id = store.ingest(bundle, force=force)
        return respond(_versioned({"speech_id": speech_id}))

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def run(store: CorpusStore, model: EffectivenessModel, *, host: str = "127.0.0.1",
        port: int = 8400, ui_dir: str | Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(store, model, ui_dir=ui_dir), host=host, port=port, log_level="info")
