"""Read-only corpus views consumed by the recommender and the service.

A corpus is anything with ``speeches()`` (sorted by id) and ``bundle(id)``;
the store's snapshots and the in-memory corpus below both satisfy it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bundle import FeatureBundle, SpeechMeta, slice_bundle
from .errors import NotFound
from .factors import FactorVector, compute_factors, undefined_factors


@dataclass(frozen=True, eq=False)
class CorpusSentence:
    index: int
    start_s: float
    end_s: float
    text: str
    factors: FactorVector
    embedding: np.ndarray  # (512,)

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True, eq=False)
class CorpusSpeech:
    speech_id: str
    meta: SpeechMeta
    factors: FactorVector
    sentences: tuple[CorpusSentence, ...]


def speech_entry(bundle: FeatureBundle) -> CorpusSpeech:
    """Whole-speech and per-sentence factor vectors for one bundle."""
    duration = bundle.meta.duration_s
    sentences = []
    for s in bundle.script.sentences:
        lo = max(0.0, s.start_s)
        hi = min(duration, s.end_s)
        fv = compute_factors(slice_bundle(bundle, lo, hi)) if lo < hi else undefined_factors()
        sentences.append(CorpusSentence(
            index=s.index, start_s=s.start_s, end_s=s.end_s, text=s.text,
            factors=fv, embedding=s.embedding,
        ))
    return CorpusSpeech(
        speech_id=bundle.meta.speech_id,
        meta=bundle.meta,
        factors=compute_factors(bundle),
        sentences=tuple(sentences),
    )


class InMemoryCorpus:
    """Corpus built directly from bundles; used by tests and one-shot analysis."""

    def __init__(self, bundles: Sequence[FeatureBundle]):
        ids = [b.meta.speech_id for b in bundles]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate speech ids")
        self._bundles: Mapping[str, FeatureBundle] = {b.meta.speech_id: b for b in bundles}
        self._entries = tuple(sorted((speech_entry(b) for b in bundles), key=lambda e: e.speech_id))

    def speeches(self) -> tuple[CorpusSpeech, ...]:
        return self._entries

    def bundle(self, speech_id: str) -> FeatureBundle:
        try:
            return self._bundles[speech_id]
        except KeyError:
            raise NotFound(f"unknown speech id {speech_id!r}") from None
