"""Multimodal feature-bundle data model: loading, validation, slicing.

A feature bundle is one speech's precomputed multimodal time series (facial
affect, gaze, pose keypoints, stage position, prosody) plus the timestamped
script and contest metadata. Bundles arrive as UTF-8 JSON (see FORMAT.md);
missing per-frame samples are encoded as ``null`` and held internally as NaN.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import InvariantError, RangeError, SchemaError

SCHEMA_VERSION = 1

# Human3.6M 17-joint order used for every keypoint array in the system.
H36M_JOINTS = (
    "hip", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle",
    "spine", "thorax", "neck", "head",
    "l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "r_elbow", "r_wrist",
)
HIP, THORAX, NECK, HEAD = 0, 8, 9, 10
L_SHOULDER, L_ELBOW, L_WRIST = 11, 12, 13
R_SHOULDER, R_ELBOW, R_WRIST = 14, 15, 16
# Everything above the knees: pelvis, spine column and both arms (13 joints).
UPPER_BODY = (0, 1, 4, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16)

# The seven classic facial-expression categories; index 6 (neutral) is the
# glyph's center wedge.
EMOTIONS = ("angry", "disgust", "fear", "happy", "sad", "surprise", "neutral")
NEUTRAL = 6

_VOWEL_GROUPS = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Fallback syllable count: contiguous vowel-letter groups, minimum 1."""
    return max(1, len(_VOWEL_GROUPS.findall(word.lower())))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SpeechMeta:
    speech_id: str
    title: str
    year: int
    region: str
    level: int  # contest level 1 (club) .. 6 (world final)
    rank: int | None
    online: bool
    fps: float
    duration_s: float
    video_url: str | None = None


@dataclass(frozen=True, eq=False)
class FrameTrack:
    """Per-frame channels; every array has one row per timestamp, NaN = missing."""

    timestamps_s: np.ndarray    # (n,)
    valence: np.ndarray         # (n,) in [-1, 1]
    arousal: np.ndarray         # (n,) in [-1, 1]
    emotion: np.ndarray         # (n,) integral category 0..6, NaN when missing
    gaze_dir: np.ndarray        # (n, 3) unit vectors
    gaze_angles: np.ndarray     # (n, 2) yaw, pitch radians
    camera_angle_deg: np.ndarray  # (n,) >= 0
    head_cam_dist: np.ndarray   # (n,) >= 0
    bbox_center: np.ndarray     # (n, 2) in [0, 1]^2
    keypoints: np.ndarray       # (n, 17, 2) normalized frame coordinates

    def __len__(self) -> int:
        return len(self.timestamps_s)

    def sliced(self, lo: int, hi: int) -> "FrameTrack":
        return FrameTrack(*(_frozen(getattr(self, f)[lo:hi]) for f in _FRAME_FIELDS))


_FRAME_FIELDS = (
    "timestamps_s", "valence", "arousal", "emotion", "gaze_dir", "gaze_angles",
    "camera_angle_deg", "head_cam_dist", "bbox_center", "keypoints",
)


@dataclass(frozen=True, eq=False)
class AudioTrack:
    """Prosody series sampled every ``hop_s`` seconds; pitch is NaN on unvoiced frames."""

    hop_s: float
    intensity_db: np.ndarray
    pitch_hz: np.ndarray
    times_s: np.ndarray  # absolute sample times; i * hop_s for a freshly loaded bundle

    def __len__(self) -> int:
        return len(self.intensity_db)

    def sliced(self, lo: int, hi: int) -> "AudioTrack":
        return AudioTrack(
            self.hop_s,
            _frozen(self.intensity_db[lo:hi]),
            _frozen(self.pitch_hz[lo:hi]),
            _frozen(self.times_s[lo:hi]),
        )


@dataclass(frozen=True, eq=False)
class Word:
    word: str
    start_s: float
    end_s: float
    syllables: int

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True, eq=False)
class Sentence:
    index: int
    text: str
    start_s: float
    end_s: float
    embedding: np.ndarray  # (512,)
    words: tuple[Word, ...]

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True, eq=False)
class ScriptTrack:
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True, eq=False)
class FeatureBundle:
    meta: SpeechMeta
    frames: FrameTrack
    audio: AudioTrack
    script: ScriptTrack

    def view(self) -> "BundleView":
        """The whole speech as a span view over [0, duration_s]."""
        return BundleView(
            meta=self.meta,
            frames=self.frames,
            audio=self.audio,
            sentences=self.script.sentences,
            span_start_s=0.0,
            span_end_s=self.meta.duration_s,
        )


@dataclass(frozen=True, eq=False)
class BundleView:
    """A half-open time span of a bundle. Construction never copies the source."""

    meta: SpeechMeta
    frames: FrameTrack
    audio: AudioTrack
    sentences: tuple[Sentence, ...]
    span_start_s: float
    span_end_s: float

    @property
    def span_duration_s(self) -> float:
        return self.span_end_s - self.span_start_s


def as_view(obj: FeatureBundle | BundleView) -> BundleView:
    return obj.view() if isinstance(obj, FeatureBundle) else obj


def slice_bundle(obj: FeatureBundle | BundleView, start_s: float, end_s: float) -> BundleView:
    """View of ``[start_s, end_s)``: frames and audio samples in the span plus
    every sentence overlapping it. The source is untouched."""
    base = as_view(obj)
    if not (base.span_start_s <= start_s < end_s <= base.span_end_s):
        raise RangeError(
            f"span [{start_s}, {end_s}) outside [{base.span_start_s}, {base.span_end_s}] or empty"
        )
    f_lo, f_hi = np.searchsorted(base.frames.timestamps_s, (start_s, end_s), side="left")
    a_lo, a_hi = np.searchsorted(base.audio.times_s, (start_s, end_s), side="left")
    sentences = tuple(
        s for s in base.sentences if s.start_s < end_s and s.end_s > start_s
    )
    return BundleView(
        meta=base.meta,
        frames=base.frames.sliced(int(f_lo), int(f_hi)),
        audio=base.audio.sliced(int(a_lo), int(a_hi)),
        sentences=sentences,
        span_start_s=float(start_s),
        span_end_s=float(end_s),
    )


# ---------------------------------------------------------------------------
# schema readers

_TOP_KEYS = {"schema_version", "meta", "frames", "audio", "script"}


def _req(doc: dict, key: str, path: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected object")
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing field")
    return doc[key]


def _num(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, "expected number")
    if not math.isfinite(v):
        raise SchemaError(path, "expected finite number")
    return float(v)


def _int(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(path, "expected integer")
    return v


def _str(v: Any, path: str) -> str:
    if not isinstance(v, str):
        raise SchemaError(path, "expected string")
    return v


def _bool(v: Any, path: str) -> bool:
    if not isinstance(v, bool):
        raise SchemaError(path, "expected boolean")
    return v


def _list(v: Any, path: str) -> list:
    if not isinstance(v, list):
        raise SchemaError(path, "expected array")
    return v


def _scalar_channel(rows: list, path: str, n: int) -> np.ndarray:
    if len(rows) != n:
        raise InvariantError(path, f"length {len(rows)} != {n} timestamps")
    out = np.empty(n, dtype=float)
    for i, v in enumerate(rows):
        if v is None:
            out[i] = np.nan
        else:
            out[i] = _num(v, f"{path}[{i}]")
    return out


def _vector_channel(rows: list, path: str, n: int, dim: int) -> np.ndarray:
    if len(rows) != n:
        raise InvariantError(path, f"length {len(rows)} != {n} timestamps")
    out = np.full((n, dim), np.nan)
    for i, v in enumerate(rows):
        if v is None:
            continue
        v = _list(v, f"{path}[{i}]")
        if len(v) != dim:
            raise SchemaError(f"{path}[{i}]", f"expected {dim} components")
        out[i] = [_num(c, f"{path}[{i}]") for c in v]
    return out


def _keypoint_channel(rows: list, path: str, n: int) -> np.ndarray:
    if len(rows) != n:
        raise InvariantError(path, f"length {len(rows)} != {n} timestamps")
    out = np.full((n, 17, 2), np.nan)
    for i, v in enumerate(rows):
        if v is None:
            continue
        v = _list(v, f"{path}[{i}]")
        if len(v) != 17:
            raise SchemaError(f"{path}[{i}]", "expected 17 joints")
        for j, pt in enumerate(v):
            pt = _list(pt, f"{path}[{i}][{j}]")
            if len(pt) != 2:
                raise SchemaError(f"{path}[{i}][{j}]", "expected [x, y]")
            out[i, j] = [_num(c, f"{path}[{i}][{j}]") for c in pt]
    return out


def _check_range(a: np.ndarray, lo: float, hi: float, path: str) -> None:
    with np.errstate(invalid="ignore"):
        bad = (a < lo) | (a > hi)
    if bool(np.any(bad)):
        i = int(np.argwhere(bad)[0][0])
        raise InvariantError(path, f"value out of [{lo}, {hi}] at index {i}")


def _parse_meta(doc: Any) -> SpeechMeta:
    meta = SpeechMeta(
        speech_id=_str(_req(doc, "speech_id", "meta"), "meta.speech_id"),
        title=_str(_req(doc, "title", "meta"), "meta.title"),
        year=_int(_req(doc, "year", "meta"), "meta.year"),
        region=_str(_req(doc, "region", "meta"), "meta.region"),
        level=_int(_req(doc, "level", "meta"), "meta.level"),
        rank=None if doc.get("rank") is None else _int(doc["rank"], "meta.rank"),
        online=_bool(_req(doc, "online", "meta"), "meta.online"),
        fps=_num(_req(doc, "fps", "meta"), "meta.fps"),
        duration_s=_num(_req(doc, "duration_s", "meta"), "meta.duration_s"),
        video_url=None if doc.get("video_url") is None else _str(doc["video_url"], "meta.video_url"),
    )
    if not 1 <= meta.level <= 6:
        raise InvariantError("meta.level", f"contest level {meta.level} outside 1..6")
    if meta.fps <= 0:
        raise InvariantError("meta.fps", "must be > 0")
    if meta.duration_s <= 0:
        raise InvariantError("meta.duration_s", "must be > 0")
    if not meta.speech_id:
        raise InvariantError("meta.speech_id", "must be non-empty")
    return meta


def _parse_frames(doc: Any) -> FrameTrack:
    ts = _list(_req(doc, "timestamps_s", "frames"), "frames.timestamps_s")
    n = len(ts)
    timestamps = np.array([_num(v, f"frames.timestamps_s[{i}]") for i, v in enumerate(ts)], dtype=float)
    if n > 1 and not bool(np.all(np.diff(timestamps) > 0)):
        raise InvariantError("frames.timestamps_s", "must be strictly increasing")

    valence = _scalar_channel(_list(_req(doc, "valence", "frames"), "frames.valence"), "frames.valence", n)
    arousal = _scalar_channel(_list(_req(doc, "arousal", "frames"), "frames.arousal"), "frames.arousal", n)
    _check_range(valence, -1.0, 1.0, "frames.valence")
    _check_range(arousal, -1.0, 1.0, "frames.arousal")

    emotion = _scalar_channel(_list(_req(doc, "emotion", "frames"), "frames.emotion"), "frames.emotion", n)
    finite = emotion[np.isfinite(emotion)]
    if finite.size and (np.any(finite != np.floor(finite)) or np.any(finite < 0) or np.any(finite > 6)):
        raise InvariantError("frames.emotion", "categories must be integers 0..6")

    gaze_dir = _vector_channel(_list(_req(doc, "gaze_dir", "frames"), "frames.gaze_dir"), "frames.gaze_dir", n, 3)
    present = ~np.isnan(gaze_dir).any(axis=1)
    if present.any():
        norms = np.linalg.norm(gaze_dir[present], axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise InvariantError("frames.gaze_dir", "vectors must have unit norm within 1e-6")

    gaze_angles = _vector_channel(
        _list(_req(doc, "gaze_angles", "frames"), "frames.gaze_angles"), "frames.gaze_angles", n, 2)
    camera_angle = _scalar_channel(
        _list(_req(doc, "camera_angle_deg", "frames"), "frames.camera_angle_deg"), "frames.camera_angle_deg", n)
    _check_range(camera_angle, 0.0, math.inf, "frames.camera_angle_deg")
    head_dist = _scalar_channel(
        _list(_req(doc, "head_cam_dist", "frames"), "frames.head_cam_dist"), "frames.head_cam_dist", n)
    _check_range(head_dist, 0.0, math.inf, "frames.head_cam_dist")
    bbox = _vector_channel(_list(_req(doc, "bbox_center", "frames"), "frames.bbox_center"), "frames.bbox_center", n, 2)
    _check_range(bbox, 0.0, 1.0, "frames.bbox_center")
    keypoints = _keypoint_channel(_list(_req(doc, "keypoints", "frames"), "frames.keypoints"), "frames.keypoints", n)

    return FrameTrack(
        timestamps_s=_frozen(timestamps),
        valence=_frozen(valence),
        arousal=_frozen(arousal),
        emotion=_frozen(emotion),
        gaze_dir=_frozen(gaze_dir),
        gaze_angles=_frozen(gaze_angles),
        camera_angle_deg=_frozen(camera_angle),
        head_cam_dist=_frozen(head_dist),
        bbox_center=_frozen(bbox),
        keypoints=_frozen(keypoints),
    )


def _parse_audio(doc: Any) -> AudioTrack:
    hop = _num(_req(doc, "hop_s", "audio"), "audio.hop_s")
    if hop <= 0:
        raise InvariantError("audio.hop_s", "must be > 0")
    intensity_rows = _list(_req(doc, "intensity_db", "audio"), "audio.intensity_db")
    pitch_rows = _list(_req(doc, "pitch_hz", "audio"), "audio.pitch_hz")
    if len(intensity_rows) != len(pitch_rows):
        raise InvariantError("audio.pitch_hz", f"length {len(pitch_rows)} != intensity length {len(intensity_rows)}")
    n = len(intensity_rows)
    intensity = _scalar_channel(intensity_rows, "audio.intensity_db", n)
    pitch = _scalar_channel(pitch_rows, "audio.pitch_hz", n)
    times = np.arange(n, dtype=float) * hop
    return AudioTrack(hop, _frozen(intensity), _frozen(pitch), _frozen(times))


def _parse_sentence(doc: Any, index: int) -> Sentence:
    path = f"script.sentences[{index}]"
    text = _str(_req(doc, "text", path), f"{path}.text")
    start = _num(_req(doc, "start_s", path), f"{path}.start_s")
    end = _num(_req(doc, "end_s", path), f"{path}.end_s")
    if not start < end:
        raise InvariantError(path, f"start_s {start} must be < end_s {end}")
    emb_rows = _list(_req(doc, "embedding", path), f"{path}.embedding")
    if len(emb_rows) != 512:
        raise InvariantError(f"{path}.embedding", f"length {len(emb_rows)} != 512")
    embedding = np.array([_num(v, f"{path}.embedding[{i}]") for i, v in enumerate(emb_rows)], dtype=float)

    words = []
    prev_start = -math.inf
    for j, wdoc in enumerate(_list(_req(doc, "words", path), f"{path}.words")):
        wpath = f"{path}.words[{j}]"
        wtext = _str(_req(wdoc, "word", wpath), f"{wpath}.word")
        ws = _num(_req(wdoc, "start_s", wpath), f"{wpath}.start_s")
        we = _num(_req(wdoc, "end_s", wpath), f"{wpath}.end_s")
        if ws > we:
            raise InvariantError(wpath, "start_s must be <= end_s")
        if ws < start - 1e-9 or we > end + 1e-9:
            raise InvariantError(wpath, "word span must nest within its sentence")
        if ws < prev_start:
            raise InvariantError(wpath, "word start times must be non-decreasing")
        prev_start = ws
        if wdoc.get("syllables") is None:
            syl = count_syllables(wtext)
        else:
            syl = _int(wdoc["syllables"], f"{wpath}.syllables")
            if syl < 1:
                raise InvariantError(f"{wpath}.syllables", "must be >= 1")
        words.append(Word(wtext, ws, we, syl))
    return Sentence(index, text, start, end, _frozen(embedding), tuple(words))


def bundle_from_doc(doc: Any) -> FeatureBundle:
    """Validate a parsed JSON document and build an immutable FeatureBundle."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected top-level object")
    extra = set(doc) - _TOP_KEYS
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise SchemaError(f"$.{sorted(missing)[0]}", "missing field")
    if extra:
        raise SchemaError(f"$.{sorted(extra)[0]}", "unexpected field")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError("$.schema_version", f"expected {SCHEMA_VERSION}")

    meta = _parse_meta(doc["meta"])
    frames = _parse_frames(doc["frames"])
    audio = _parse_audio(doc["audio"])

    sents = _list(_req(doc["script"], "sentences", "script"), "script.sentences")
    sentences = tuple(_parse_sentence(s, i) for i, s in enumerate(sents))
    for a, b in zip(sentences, sentences[1:]):
        if b.start_s < a.end_s:
            raise InvariantError(
                f"script.sentences[{b.index}]",
                "sentences must be time-ordered and non-overlapping",
            )

    if len(frames) and frames.timestamps_s[-1] > meta.duration_s + 1.0 / meta.fps:
        raise InvariantError(
            "frames.timestamps_s",
            f"last timestamp {frames.timestamps_s[-1]:.3f} beyond duration + one frame period",
        )

    return FeatureBundle(meta=meta, frames=frames, audio=audio, script=ScriptTrack(sentences))


def load_bundle(raw: bytes | str) -> FeatureBundle:
    """Parse and fully validate feature-bundle JSON bytes."""
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg}") from e
    return bundle_from_doc(doc)


# ---------------------------------------------------------------------------
# serialization


def _opt(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


def _opt_row(row: np.ndarray) -> list[float] | None:
    if np.isnan(row).any():
        return None
    return [float(v) for v in row]


def bundle_to_doc(b: FeatureBundle) -> dict:
    """Plain-JSON document for a bundle; inverse of :func:`bundle_from_doc`."""
    f = b.frames
    emotion = [None if math.isnan(v) else int(v) for v in f.emotion]
    keypoints = [
        None if np.isnan(f.keypoints[i]).any() else [[float(x), float(y)] for x, y in f.keypoints[i]]
        for i in range(len(f))
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": {
            "speech_id": b.meta.speech_id,
            "title": b.meta.title,
            "year": b.meta.year,
            "region": b.meta.region,
            "level": b.meta.level,
            "rank": b.meta.rank,
            "online": b.meta.online,
            "fps": b.meta.fps,
            "duration_s": b.meta.duration_s,
            "video_url": b.meta.video_url,
        },
        "frames": {
            "timestamps_s": [float(t) for t in f.timestamps_s],
            "valence": [_opt(v) for v in f.valence],
            "arousal": [_opt(v) for v in f.arousal],
            "emotion": emotion,
            "gaze_dir": [_opt_row(r) for r in f.gaze_dir],
            "gaze_angles": [_opt_row(r) for r in f.gaze_angles],
            "camera_angle_deg": [_opt(v) for v in f.camera_angle_deg],
            "head_cam_dist": [_opt(v) for v in f.head_cam_dist],
            "bbox_center": [_opt_row(r) for r in f.bbox_center],
            "keypoints": keypoints,
        },
        "audio": {
            "hop_s": b.audio.hop_s,
            "intensity_db": [_opt(v) for v in b.audio.intensity_db],
            "pitch_hz": [_opt(v) for v in b.audio.pitch_hz],
        },
        "script": {
            "sentences": [
                {
                    "text": s.text,
                    "start_s": s.start_s,
                    "end_s": s.end_s,
                    "embedding": [float(v) for v in s.embedding],
                    "words": [
                        {"word": w.word, "start_s": w.start_s, "end_s": w.end_s, "syllables": w.syllables}
                        for w in s.words
                    ],
                }
                for s in b.script.sentences
            ]
        },
    }


def dump_bundle(b: FeatureBundle) -> bytes:
    """Canonical UTF-8 JSON serialization (stable key order, compact separators)."""
    return json.dumps(bundle_to_doc(b), separators=(",", ":"), allow_nan=False).encode()
