"""Similar / different speech and sentence recommendation.

Two granularities (speech, sentence) x two modes (factor, script). Factor
mode joins the selected factors into a min-max-normalized vector and ranks by
Euclidean distance; script mode ranks by cosine distance between semantic
embeddings. Top-k selection runs through a bounded heap with ties broken by
candidate id order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bundle import slice_bundle
from .corpus import CorpusSentence, CorpusSpeech
from .errors import EmptyCandidates, EmptyScript, NotFound, UndefinedFactor
from .factors import FactorId, FactorVector, compute_factors

GRANULARITIES = ("speech", "sentence")
MODES = ("factor", "script")
DIRECTIONS = ("most-similar", "most-different")


@dataclass(frozen=True)
class RecommendationQuery:
    speech_id: str
    start_s: float | None = None
    end_s: float | None = None
    granularity: str = "speech"
    mode: str = "factor"
    selected_factors: tuple[FactorId, ...] = ()
    k: int = 5
    direction: str = "most-similar"
    include_self: bool = False

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if (self.start_s is None) != (self.end_s is None):
            raise ValueError("start_s and end_s must be given together")
        if self.mode == "factor" and not self.selected_factors:
            raise ValueError("factor mode needs at least one selected factor")


@dataclass(frozen=True)
class Candidate:
    speech_id: str
    sentence_index: int | None
    start_s: float
    end_s: float
    distance: float
    text: str | None = None


@dataclass(frozen=True)
class RecommendationResult:
    query: RecommendationQuery
    candidates: tuple[Candidate, ...]
    bounds: Mapping[str, tuple[float, float]] | None  # factor id -> (min, max); factor mode only
    skipped: int  # candidates dropped for undefined factors / null embeddings


# ---------------------------------------------------------------------------
# vector construction


def min_max_bounds(pool_values: Sequence[float], query_value: float) -> tuple[float, float]:
    lo = min(min(pool_values, default=query_value), query_value)
    hi = max(max(pool_values, default=query_value), query_value)
    return lo, hi


def normalize_value(v: float, lo: float, hi: float) -> float:
    if hi - lo <= 0:
        return 0.5  # degenerate factor: every candidate agrees
    return (v - lo) / (hi - lo)


def build_factor_vector(fv: FactorVector, selected: Sequence[FactorId],
                        bounds: Mapping[FactorId, tuple[float, float]]) -> np.ndarray:
    """Selected factor values joined into one min-max-normalized vector."""
    out = np.empty(len(selected))
    for i, f in enumerate(selected):
        v = fv.value(f)
        if v is None:
            raise UndefinedFactor(f.id)
        out[i] = normalize_value(v, *bounds[f])
    return out


def speech_script_vector(sentences: Sequence[CorpusSentence]) -> np.ndarray:
    """Duration-weighted mean of the sentence embeddings."""
    if not sentences:
        raise EmptyScript("speech has no sentences")
    weights = np.array([s.duration_s for s in sentences], dtype=float)
    embs = np.stack([s.embedding for s in sentences])
    return (weights[:, None] * embs).sum(axis=0) / weights.sum()


def cosine_distance_vec(u: np.ndarray, v: np.ndarray) -> float | None:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu <= 0 or nv <= 0:
        return None
    return 1.0 - float(np.dot(u, v)) / (nu * nv)


# ---------------------------------------------------------------------------
# recommendation pipeline


@dataclass(frozen=True)
class _Entry:
    speech_id: str
    sentence_index: int | None
    start_s: float
    end_s: float
    text: str | None
    factors: FactorVector | None
    vector: np.ndarray | None  # script embedding, when in script mode


def _query_factors(query: RecommendationQuery, corpus, entry: CorpusSpeech) -> FactorVector:
    if query.start_s is None:
        return entry.factors
    bundle = corpus.bundle(query.speech_id)
    return compute_factors(slice_bundle(bundle, query.start_s, query.end_s))


def _query_script_vector(query: RecommendationQuery, entry: CorpusSpeech) -> np.ndarray:
    if query.start_s is None:
        sents = entry.sentences
    else:
        sents = tuple(s for s in entry.sentences
                      if s.start_s < query.end_s and s.end_s > query.start_s)
    return speech_script_vector(sents)


def _overlaps_query(query: RecommendationQuery, s: CorpusSentence) -> bool:
    if query.start_s is None:
        return True
    return s.start_s < query.end_s and s.end_s > query.start_s


def _enumerate_candidates(query: RecommendationQuery, corpus) -> list[_Entry]:
    out: list[_Entry] = []
    for sp in corpus.speeches():  # sorted by id: the stable tie-break order
        own = sp.speech_id == query.speech_id
        if query.granularity == "speech":
            if own and not query.include_self:
                continue
            out.append(_Entry(sp.speech_id, None, 0.0, sp.meta.duration_s, None, sp.factors, None))
        else:
            for s in sp.sentences:
                if own and not query.include_self and _overlaps_query(query, s):
                    continue
                out.append(_Entry(sp.speech_id, s.index, s.start_s, s.end_s, s.text,
                                  s.factors, s.embedding))
    return out


def recommend(query: RecommendationQuery, corpus) -> RecommendationResult:
    """Top-k candidates for the query span, per the query's granularity, mode
    and direction. Candidates missing a selected factor (or with a null
    embedding) are skipped and counted, never fatal."""
    speeches = {sp.speech_id: sp for sp in corpus.speeches()}
    if query.speech_id not in speeches:
        raise NotFound(f"unknown speech id {query.speech_id!r}")
    own = speeches[query.speech_id]

    entries = _enumerate_candidates(query, corpus)
    if not entries:
        raise EmptyCandidates("no candidates after excluding the query span")

    skipped = 0
    scored: list[tuple[_Entry, float]] = []
    bounds_doc: dict[str, tuple[float, float]] | None = None

    if query.mode == "factor":
        selected = query.selected_factors
        qf = _query_factors(query, corpus, own)
        for f in selected:
            if qf.value(f) is None:
                raise UndefinedFactor(f.id)
        usable = [e for e in entries
                  if all(e.factors.value(f) is not None for f in selected)]
        skipped = len(entries) - len(usable)
        bounds = {
            f: min_max_bounds([e.factors.value(f) for e in usable], qf.value(f))
            for f in selected
        }
        bounds_doc = {f.id: bounds[f] for f in selected}
        qv = build_factor_vector(qf, selected, bounds)
        for e in usable:
            cv = build_factor_vector(e.factors, selected, bounds)
            scored.append((e, float(np.linalg.norm(cv - qv))))
    else:
        if query.granularity == "speech":
            vectors = [(e, speech_script_vector(speeches[e.speech_id].sentences))
                       for e in entries if speeches[e.speech_id].sentences]
            skipped = len(entries) - len(vectors)
        else:
            vectors = [(e, e.vector) for e in entries]
        qv = _query_script_vector(query, own)
        for e, v in vectors:
            d = cosine_distance_vec(v, qv)
            if d is None:
                skipped += 1
                continue
            scored.append((e, d))

    if query.direction == "most-similar":
        top = heapq.nsmallest(query.k, scored, key=lambda t: t[1])
    else:
        top = heapq.nlargest(query.k, scored, key=lambda t: t[1])

    candidates = tuple(
        Candidate(e.speech_id, e.sentence_index, e.start_s, e.end_s, d, e.text)
        for e, d in top
    )
    return RecommendationResult(query=query, candidates=candidates,
                                bounds=bounds_doc, skipped=skipped)


# ---------------------------------------------------------------------------
# serialization


def query_to_doc(q: RecommendationQuery) -> dict:
    return {
        "speech_id": q.speech_id,
        "start_s": q.start_s,
        "end_s": q.end_s,
        "granularity": q.granularity,
        "mode": q.mode,
        "selected_factors": [f.id for f in q.selected_factors],
        "k": q.k,
        "direction": q.direction,
        "include_self": q.include_self,
    }


def query_from_doc(doc: Mapping) -> RecommendationQuery:
    return RecommendationQuery(
        speech_id=doc["speech_id"],
        start_s=doc.get("start_s"),
        end_s=doc.get("end_s"),
        granularity=doc.get("granularity", "speech"),
        mode=doc.get("mode", "factor"),
        selected_factors=tuple(FactorId.from_id(i) for i in doc.get("selected_factors", [])),
        k=int(doc.get("k", 5)),
        direction=doc.get("direction", "most-similar"),
        include_self=bool(doc.get("include_self", False)),
    )


def result_to_doc(r: RecommendationResult) -> dict:
    return {
        "query": query_to_doc(r.query),
        "candidates": [
            {
                "speech_id": c.speech_id,
                "sentence_index": c.sentence_index,
                "start_s": c.start_s,
                "end_s": c.end_s,
                "distance": c.distance,
                "text": c.text,
            }
            for c in r.candidates
        ],
        "bounds": None if r.bounds is None else {k: list(v) for k, v in r.bounds.items()},
        "skipped": r.skipped,
    }
