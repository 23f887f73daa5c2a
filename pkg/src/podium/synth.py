"""Deterministic synthetic feature-bundle generator.

Stands in for the deep-model extraction stage: produces complete, valid
bundles with controllable per-channel behavior so every downstream module can
be exercised without real video. Same seed + profile => byte-identical
serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .bundle import (
    EMOTIONS,
    FeatureBundle,
    L_ELBOW,
    L_WRIST,
    R_ELBOW,
    R_WRIST,
    bundle_from_doc,
)

# Standing upper-body pose in normalized frame coordinates (y grows downward),
# Human3.6M joint order.
_BASE_POSE = np.array([
    [0.50, 0.78],   # hip
    [0.46, 0.78],   # r_hip
    [0.46, 0.90],   # r_knee
    [0.46, 0.99],   # r_ankle
    [0.54, 0.78],   # l_hip
    [0.54, 0.90],   # l_knee
    [0.54, 0.99],   # l_ankle
    [0.50, 0.62],   # spine
    [0.50, 0.47],   # thorax
    [0.50, 0.41],   # neck
    [0.50, 0.33],   # head
    [0.58, 0.48],   # l_shoulder
    [0.63, 0.60],   # l_elbow
    [0.65, 0.70],   # l_wrist
    [0.42, 0.48],   # r_shoulder
    [0.37, 0.60],   # r_elbow
    [0.35, 0.70],   # r_wrist
])

_REGIONS = ("north-america", "europe", "asia-pacific", "latin-america", "africa")


@dataclass(frozen=True)
class SynthProfile:
    """Generator parameters. Zero noise/drift amplitudes give constant channels."""

    duration_s: float = 72.0
    fps: float = 10.0
    hop_s: float = 0.1
    sentence_count: int = 10
    words_per_sentence: tuple[int, int] = (6, 12)
    syllables_range: tuple[int, int] = (1, 4)
    level: int | None = None

    valence_base: float = 0.25
    valence_drift: float = 0.15
    valence_noise: float = 0.08
    arousal_base: float = 0.10
    arousal_drift: float = 0.20
    arousal_noise: float = 0.08
    emotion_hold_s: float = 2.5
    emotion_weights: tuple[float, ...] = (1.0, 0.4, 0.6, 3.0, 1.0, 1.0, 5.0)

    gaze_yaw_base: float = 0.12
    gaze_pitch_base: float = -0.10
    gaze_drift: float = 0.06
    gaze_noise: float = 0.04
    camera_angle_base: float = 6.0
    camera_angle_noise: float = 3.0

    head_dist_base: float = 1.30
    head_dist_drift: float = 0.20
    head_dist_noise: float = 0.04
    bbox_base: tuple[float, float] = (0.50, 0.55)
    bbox_wander: float = 0.08
    bbox_noise: float = 0.01

    pose_sway: float = 0.05
    pose_noise: float = 0.006

    intensity_base: float = 62.0
    intensity_drift: float = 6.0
    intensity_noise: float = 1.5
    pitch_base: float = 150.0
    pitch_drift: float = 25.0
    pitch_noise: float = 8.0
    voiced_fraction: float = 0.85

    rate_base: float = 0.20       # seconds per syllable
    rate_noise: float = 0.05
    word_gap_base: float = 0.12
    word_gap_noise: float = 0.08
    sentence_gap_base: float = 0.80
    sentence_gap_noise: float = 0.30
    lead_in_s: float = 0.5

    missing_rate: float = 0.02

    @classmethod
    def constant(cls, **overrides: Any) -> "SynthProfile":
        """Profile whose every series is constant (all drift/noise zero)."""
        base = dict(
            valence_drift=0.0, valence_noise=0.0,
            arousal_drift=0.0, arousal_noise=0.0,
            emotion_weights=(0.0,) * 6 + (1.0,),
            gaze_drift=0.0, gaze_noise=0.0,
            camera_angle_noise=0.0,
            head_dist_drift=0.0, head_dist_noise=0.0,
            bbox_wander=0.0, bbox_noise=0.0,
            pose_sway=0.0, pose_noise=0.0,
            intensity_drift=0.0, intensity_noise=0.0,
            pitch_drift=0.0, pitch_noise=0.0,
            voiced_fraction=1.0,
            words_per_sentence=(8, 8), syllables_range=(2, 2),
            rate_noise=0.0, word_gap_noise=0.0,
            sentence_gap_base=0.12, sentence_gap_noise=0.0,
            missing_rate=0.0,
        )
        base.update(overrides)
        return cls(**base)

    def validate(self) -> None:
        if self.duration_s <= 0 or self.fps <= 0 or self.hop_s <= 0:
            raise ValueError("duration_s, fps and hop_s must be positive")
        if self.sentence_count < 0:
            raise ValueError("sentence_count must be >= 0")
        if self.level is not None and not 1 <= self.level <= 6:
            raise ValueError("level must be in 1..6")
        lo, hi = self.words_per_sentence
        if lo < 1 or hi < lo:
            raise ValueError("words_per_sentence must be a non-empty ascending range")
        slo, shi = self.syllables_range
        if slo < 1 or shi < slo:
            raise ValueError("syllables_range must be a non-empty ascending range")
        if not 0 <= self.missing_rate < 1:
            raise ValueError("missing_rate must be in [0, 1)")

    def jittered(self, rng: np.random.Generator) -> "SynthProfile":
        """Per-speech variation of the channel baselines, for corpus building."""
        u = rng.uniform
        return replace(
            self,
            valence_base=float(u(-0.4, 0.6)),
            arousal_base=float(u(-0.5, 0.6)),
            emotion_weights=tuple(float(w) for w in rng.dirichlet(np.ones(7) * 1.2)),
            gaze_yaw_base=float(u(0.05, 0.3) * rng.choice((-1, 1))),
            gaze_pitch_base=float(u(0.05, 0.25) * rng.choice((-1, 1))),
            camera_angle_base=float(u(2.0, 12.0)),
            head_dist_base=float(u(0.8, 2.2)),
            bbox_wander=float(u(0.02, 0.15)),
            pose_sway=float(u(0.01, 0.1)),
            intensity_base=float(u(52.0, 74.0)),
            intensity_drift=float(u(2.0, 9.0)),
            pitch_base=float(u(110.0, 220.0)),
            pitch_drift=float(u(8.0, 40.0)),
            rate_base=float(u(0.14, 0.3)),
            sentence_gap_base=float(u(0.4, 1.3)),
        )


_WORD_STOCK = (
    "audience", "believe", "camera", "dream", "energy", "focus", "gesture",
    "horizon", "idea", "journey", "kindness", "listen", "moment", "nervous",
    "online", "practice", "question", "resilience", "stage", "together",
    "voice", "wonder", "yesterday", "zeal",
)


def _drift(rng: np.random.Generator, t: np.ndarray, amp: float) -> np.ndarray:
    # One slow sinusoid; the phase and period are drawn even when amp == 0 so
    # that toggling amplitudes never shifts the rest of the random stream.
    period = rng.uniform(18.0, 45.0)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    return amp * np.sin(2.0 * math.pi * t / period + phase)


def _emotion_series(rng: np.random.Generator, n: int, fps: float, p: SynthProfile) -> np.ndarray:
    weights = np.asarray(p.emotion_weights, dtype=float)
    weights = weights / weights.sum()
    out = np.empty(n)
    i = 0
    while i < n:
        cat = int(rng.choice(len(EMOTIONS), p=weights))
        dwell = max(1, int(round(rng.exponential(p.emotion_hold_s) * fps)))
        out[i : i + dwell] = cat
        i += dwell
    return out


def _word_text(rng: np.random.Generator) -> str:
    return str(rng.choice(_WORD_STOCK))


def _script_layout(rng: np.random.Generator, p: SynthProfile) -> list[dict]:
    sentences: list[dict] = []
    t = p.lead_in_s
    for _ in range(p.sentence_count):
        wlo, whi = p.words_per_sentence
        n_words = int(rng.integers(wlo, whi + 1))
        words = []
        start = t
        for j in range(n_words):
            syl = int(rng.integers(p.syllables_range[0], p.syllables_range[1] + 1))
            rate = max(0.06, p.rate_base + p.rate_noise * rng.standard_normal())
            dur = syl * rate
            words.append({"word": _word_text(rng), "start_s": t, "end_s": t + dur, "syllables": syl})
            t += dur
            if j < n_words - 1:
                t += max(0.0, p.word_gap_base + p.word_gap_noise * rng.standard_normal())
        sentences.append({"start_s": start, "end_s": t, "words": words})
        t += max(0.05, p.sentence_gap_base + p.sentence_gap_noise * rng.standard_normal())

    # Compress about the lead-in when an unlucky draw overruns the speech.
    limit = p.duration_s - 0.2
    if sentences and sentences[-1]["end_s"] > limit:
        scale = (limit - p.lead_in_s) / (sentences[-1]["end_s"] - p.lead_in_s)

        def _c(x: float) -> float:
            return p.lead_in_s + (x - p.lead_in_s) * scale

        for s in sentences:
            s["start_s"], s["end_s"] = _c(s["start_s"]), _c(s["end_s"])
            for w in s["words"]:
                w["start_s"], w["end_s"] = _c(w["start_s"]), _c(w["end_s"])

    for s in sentences:
        s["text"] = " ".join(w["word"] for w in s["words"])
        emb = rng.standard_normal(512)
        s["embedding"] = (emb / np.linalg.norm(emb)).tolist()
    return sentences


def synth_bundle(seed: int, profile: SynthProfile | None = None, *, speech_id: str | None = None) -> FeatureBundle:
    """Generate a valid bundle, deterministic for (seed, profile, speech_id)."""
    p = profile or SynthProfile()
    p.validate()
    rng = np.random.default_rng(seed)

    n = int(math.floor(p.duration_s * p.fps - 1e-9))
    t = np.arange(n) / p.fps

    valence = np.clip(p.valence_base + _drift(rng, t, p.valence_drift)
                      + p.valence_noise * rng.standard_normal(n), -1.0, 1.0)
    arousal = np.clip(p.arousal_base + _drift(rng, t, p.arousal_drift)
                      + p.arousal_noise * rng.standard_normal(n), -1.0, 1.0)
    emotion = _emotion_series(rng, n, p.fps, p)

    yaw = p.gaze_yaw_base + _drift(rng, t, p.gaze_drift) + p.gaze_noise * rng.standard_normal(n)
    pitch_a = p.gaze_pitch_base + _drift(rng, t, p.gaze_drift) + p.gaze_noise * rng.standard_normal(n)
    gaze_dir = np.stack([
        np.cos(pitch_a) * np.sin(yaw),
        np.sin(pitch_a),
        np.cos(pitch_a) * np.cos(yaw),
    ], axis=1)
    camera_angle = np.abs(p.camera_angle_base + p.camera_angle_noise * rng.standard_normal(n))
    head_dist = np.maximum(0.05, p.head_dist_base + _drift(rng, t, p.head_dist_drift)
                           + p.head_dist_noise * rng.standard_normal(n))

    # Stage position: smoothed random walk around the base point.
    steps = rng.standard_normal((n, 2)) * p.bbox_wander / max(1.0, math.sqrt(p.fps))
    walk = np.cumsum(steps, axis=0)
    if n:
        walk -= walk.mean(axis=0)
    bbox = np.clip(np.asarray(p.bbox_base) + walk + p.bbox_noise * rng.standard_normal((n, 2)), 0.02, 0.98)

    # Pose: base skeleton rides the bbox offset; arms sway independently.
    kp = np.tile(_BASE_POSE, (n, 1, 1))
    offset = bbox - np.asarray(p.bbox_base)
    kp += offset[:, None, :]
    sway_t = 2.0 * math.pi * t
    for joint, freq, ax in ((L_WRIST, 0.31, 0), (R_WRIST, 0.23, 0), (L_ELBOW, 0.17, 1), (R_ELBOW, 0.29, 1)):
        kp[:, joint, ax] += p.pose_sway * np.sin(sway_t * freq + rng.uniform(0, 2 * math.pi))
    kp += p.pose_noise * rng.standard_normal(kp.shape)

    n_a = int(math.floor(p.duration_s / p.hop_s - 1e-9))
    ta = np.arange(n_a) * p.hop_s
    intensity = p.intensity_base + _drift(rng, ta, p.intensity_drift) + p.intensity_noise * rng.standard_normal(n_a)
    pitch = np.maximum(40.0, p.pitch_base + _drift(rng, ta, p.pitch_drift)
                       + p.pitch_noise * rng.standard_normal(n_a))
    voiced = rng.random(n_a) < p.voiced_fraction

    face_miss = rng.random(n) < p.missing_rate
    gaze_miss = rng.random(n) < p.missing_rate
    pose_miss = rng.random(n) < p.missing_rate

    sentences = _script_layout(rng, p)

    level = p.level if p.level is not None else int(rng.integers(1, 7))
    rank = int(rng.integers(1, 11)) if rng.random() < 0.7 else None
    sid = speech_id if speech_id is not None else f"synth-{seed:05d}"

    def scalars(a: np.ndarray, miss: np.ndarray) -> list:
        return [None if miss[i] else float(a[i]) for i in range(n)]

    def rows(a: np.ndarray, miss: np.ndarray) -> list:
        return [None if miss[i] else [float(v) for v in a[i]] for i in range(n)]

    doc = {
        "schema_version": 1,
        "meta": {
            "speech_id": sid,
            "title": f"Synthetic speech {seed}",
            "year": 2018 + int(rng.integers(0, 6)),
            "region": str(rng.choice(_REGIONS)),
            "level": level,
            "rank": rank,
            "online": bool(rng.random() < 0.9),
            "fps": p.fps,
            "duration_s": p.duration_s,
            "video_url": None,
        },
        "frames": {
            "timestamps_s": [float(v) for v in t],
            "valence": scalars(valence, face_miss),
            "arousal": scalars(arousal, face_miss),
            "emotion": [None if face_miss[i] else int(emotion[i]) for i in range(n)],
            "gaze_dir": rows(gaze_dir, gaze_miss),
            "gaze_angles": rows(np.stack([yaw, pitch_a], axis=1), gaze_miss),
            "camera_angle_deg": scalars(camera_angle, gaze_miss),
            "head_cam_dist": scalars(head_dist, gaze_miss),
            "bbox_center": rows(bbox, pose_miss),
            "keypoints": [
                None if pose_miss[i] else [[float(x), float(y)] for x, y in kp[i]]
                for i in range(n)
            ],
        },
        "audio": {
            "hop_s": p.hop_s,
            "intensity_db": [float(v) for v in intensity],
            "pitch_hz": [float(pitch[i]) if voiced[i] else None for i in range(n_a)],
        },
        "script": {"sentences": [
            {
                "text": s["text"],
                "start_s": s["start_s"],
                "end_s": s["end_s"],
                "embedding": s["embedding"],
                "words": s["words"],
            }
            for s in sentences
        ]},
    }
    return bundle_from_doc(doc)
