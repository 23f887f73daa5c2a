"""Glyph-ready aggregates: SpeechTwin summaries, 8-slice temporal views,
gaze heatmaps, representative gestures and video-overlay trails.

Everything here emits plain data for the UI; no drawing happens engine-side.
Pose clustering runs a seeded diagonal-covariance Gaussian mixture over
thorax-aligned, shoulder-normalized upper-body vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .bundle import (
    BundleView,
    FeatureBundle,
    EMOTIONS,
    HEAD,
    NEUTRAL,
    as_view,
)
from .errors import DegeneratePose, NoPoses, RangeError
from .factors import normalize_pose

POSE_CLUSTERS = 10
TIME_SLICE_COUNT = 8
HEATMAP_GRID = 16
HEATMAP_HALF_RANGE = math.pi / 2
FOOTPRINT_LIMIT = 500
OVERLAY_SAMPLES = 10
OVERLAY_MIN_OPACITY = 0.1
AUDIO_SAMPLES_PER_SLICE = 200

# Geometric glyph encodings shared with the UI: each maps one summary field
# through a clamped linear ramp, so more input always draws strictly more.
GLYPH_ENCODINGS = {
    "mouth_curvature": {"input": "valence_mean", "domain": [-1.0, 1.0], "range": [-1.0, 1.0]},
    "spike_protrusion": {"input": "arousal_mean", "domain": [-1.0, 1.0], "range": [0.0, 0.35]},
    "mouth_width": {"input": "volume_mean", "domain": [30.0, 90.0], "range": [0.15, 0.75]},
    "min_face_radius": 0.18,
}

EMOTION_PALETTE = {
    "standard": ("#d64545", "#7b9e37", "#8458b3", "#f2c230", "#3e7cb1", "#e8803a", "#9e9e9e"),
    "colorblind": ("#c44601", "#f57600", "#8babf1", "#ffdf4d", "#054fb9", "#89ce00", "#9e9e9e"),
}

# Diverging effectiveness scale, very low (dark red) to very high (dark blue);
# gray marks a factor without a significant effectiveness relationship.
EFFECTIVENESS_SCALE = ("#67001f", "#d6604d", "#f7f7f7", "#4393c3", "#053061")
NON_SIGNIFICANT_COLOR = "#c9c9c9"


def linear_map(x: float, domain: Sequence[float], out_range: Sequence[float]) -> float:
    lo, hi = domain
    a, b = out_range
    t = (min(max(x, lo), hi) - lo) / (hi - lo)
    return a + t * (b - a)


def mouth_curvature(valence_mean: float) -> float:
    enc = GLYPH_ENCODINGS["mouth_curvature"]
    return linear_map(valence_mean, enc["domain"], enc["range"])


def spike_protrusion(arousal_mean: float) -> float:
    enc = GLYPH_ENCODINGS["spike_protrusion"]
    return linear_map(arousal_mean, enc["domain"], enc["range"])


def mouth_width(volume_mean: float) -> float:
    enc = GLYPH_ENCODINGS["mouth_width"]
    return linear_map(volume_mean, enc["domain"], enc["range"])


NEUTRAL_VOLUME_DB = sum(GLYPH_ENCODINGS["mouth_width"]["domain"]) / 2.0


# ---------------------------------------------------------------------------
# pose clustering


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [X[int(rng.integers(len(X)))]]
    for _ in range(1, k):
        d2 = np.min(np.stack([np.sum((X - c) ** 2, axis=1) for c in centers]), axis=0)
        total = float(d2.sum())
        if total <= 0:
            centers.append(X[int(rng.integers(len(X)))])
            continue
        centers.append(X[int(rng.choice(len(X), p=d2 / total))])
    return np.stack(centers)


def _gmm_em(X: np.ndarray, k: int, rng: np.random.Generator,
            max_iter: int = 200, tol: float = 1e-7, floor: float = 1e-6):
    """Diagonal-covariance EM; returns (assignments, means, mean log-likelihood)."""
    n, d = X.shape
    means = _kmeanspp(X, k, rng)
    # hard initial responsibilities from the seeding
    dist = np.stack([np.sum((X - m) ** 2, axis=1) for m in means], axis=1)
    resp = np.zeros((n, k))
    resp[np.arange(n), np.argmin(dist, axis=1)] = 1.0

    prev_ll = -np.inf
    log_resp = None
    for _ in range(max_iter):
        nk = np.maximum(resp.sum(axis=0), 1e-12)
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        var = (resp.T @ (X**2)) / nk[:, None] - means**2
        var = np.maximum(var, 0.0) + floor

        log_prob = -0.5 * (
            d * math.log(2.0 * math.pi)
            + np.sum(np.log(var), axis=1)[None, :]
            + np.sum((X[:, None, :] - means[None, :, :]) ** 2 / var[None, :, :], axis=2)
        )
        log_weighted = log_prob + np.log(np.maximum(weights, 1e-300))[None, :]
        log_norm = logsumexp(log_weighted, axis=1)
        log_resp = log_weighted - log_norm[:, None]
        resp = np.exp(log_resp)

        ll = float(log_norm.mean())
        if abs(ll - prev_ll) < tol:
            break
        prev_ll = ll

    assignments = np.argmax(resp, axis=1)
    return assignments, means, prev_ll


@dataclass(frozen=True, eq=False)
class PoseClusters:
    frame_indices: np.ndarray   # original frame index of each clustered pose
    vectors: np.ndarray         # (m, 26) normalized pose vectors
    assignments: np.ndarray     # (m,) cluster label per pose
    weights: np.ndarray         # (k,) membership fraction per cluster
    skipped: int                # frames dropped as degenerate


def cluster_poses(keypoints: np.ndarray, k: int = POSE_CLUSTERS, seed: int = 0) -> PoseClusters:
    """Pose clusters over frames with keypoints; deterministic per seed.

    The component count shrinks to the number of distinct poses when the span
    carries fewer than ``k``; weights are hard-assignment membership fractions.
    """
    kp = np.asarray(keypoints, dtype=float)
    vectors, indices = [], []
    skipped = 0
    for i in range(len(kp)):
        if np.isnan(kp[i]).any():
            continue
        try:
            vectors.append(normalize_pose(kp[i]))
            indices.append(i)
        except DegeneratePose:
            skipped += 1
    if not vectors:
        raise NoPoses("no usable poses in span")
    X = np.stack(vectors)
    distinct = np.unique(X, axis=0)
    k_eff = min(k, len(distinct))
    if k_eff == 1:
        assignments = np.zeros(len(X), dtype=int)
    else:
        rng = np.random.default_rng(seed)
        assignments, _, _ = _gmm_em(X, k_eff, rng)
    weights = np.bincount(assignments, minlength=k_eff).astype(float) / len(X)
    return PoseClusters(
        frame_indices=np.asarray(indices),
        vectors=X,
        assignments=np.asarray(assignments),
        weights=weights,
        skipped=skipped,
    )


def representative_pose(vectors: np.ndarray) -> int:
    """Index of the member with the smallest summed cosine distance to the
    rest; ties resolve to the earliest member."""
    if len(vectors) == 0:
        raise NoPoses("empty cluster")
    if len(vectors) == 1:
        return 0
    norms = np.linalg.norm(vectors, axis=1)
    unit = vectors / norms[:, None]
    dist = 1.0 - unit @ unit.T
    np.fill_diagonal(dist, 0.0)  # self-distance is exactly 0; keep ties honest
    return int(np.argmin(dist.sum(axis=1)))


# ---------------------------------------------------------------------------
# SpeechTwin


@dataclass(frozen=True, eq=False)
class RepresentativeGesture:
    pose: np.ndarray  # (17, 2) keypoints of the representative frame
    weight: float


@dataclass(frozen=True, eq=False)
class SpeechTwinSummary:
    emotion_proportions: tuple[float, ...]   # 7 fractions, category order
    valence_mean: float
    arousal_mean: float
    gaze_mean: tuple[float, float]           # (yaw, pitch) radians
    volume_mean: float
    representative_gestures: tuple[RepresentativeGesture, ...]
    footprints: tuple[tuple[float, float], ...]
    coverage: Mapping[str, float]


def _channel_mean(a: np.ndarray) -> tuple[float | None, int]:
    ok = np.isfinite(a) if a.ndim == 1 else ~np.isnan(a).any(axis=1)
    count = int(np.count_nonzero(ok))
    if count == 0:
        return None, 0
    return a[ok].mean(axis=0), count


def _emotion_proportions(emotion: np.ndarray) -> tuple[tuple[float, ...] | None, int]:
    ok = np.isfinite(emotion)
    count = int(np.count_nonzero(ok))
    if count == 0:
        return None, 0
    hist = np.bincount(emotion[ok].astype(int), minlength=len(EMOTIONS)).astype(float)
    return tuple(float(v) for v in hist / count), count


def _footprints(bbox: np.ndarray, limit: int = FOOTPRINT_LIMIT) -> tuple[tuple[float, float], ...]:
    rows = bbox[~np.isnan(bbox).any(axis=1)]
    if len(rows) > limit:
        stride = math.ceil(len(rows) / limit)
        rows = rows[::stride]
    return tuple((float(x), float(y)) for x, y in rows)


def speech_twin(obj: FeatureBundle | BundleView, pose_seed: int = 0) -> SpeechTwinSummary:
    """Glyph aggregate of a span; missing channels fall back to neutral values
    and are flagged by a zero coverage fraction."""
    view = as_view(obj)
    f = view.frames
    n = len(f)

    props, emo_count = _emotion_proportions(f.emotion)
    val_mean, val_count = _channel_mean(f.valence)
    aro_mean, aro_count = _channel_mean(f.arousal)
    gaze_mean, gaze_count = _channel_mean(f.gaze_angles)
    vol_mean, vol_count = _channel_mean(view.audio.intensity_db)

    gestures: list[RepresentativeGesture] = []
    pose_count = 0
    try:
        clusters = cluster_poses(f.keypoints, POSE_CLUSTERS, pose_seed)
        pose_count = len(clusters.vectors)
        order = sorted(
            (c for c in range(len(clusters.weights)) if clusters.weights[c] > 0),
            key=lambda c: (-clusters.weights[c], c),
        )
        for c in order:
            members = np.flatnonzero(clusters.assignments == c)
            rep = members[representative_pose(clusters.vectors[members])]
            frame = int(clusters.frame_indices[rep])
            gestures.append(RepresentativeGesture(
                pose=f.keypoints[frame], weight=float(clusters.weights[c])))
    except NoPoses:
        pass

    n_audio = len(view.audio)
    return SpeechTwinSummary(
        emotion_proportions=props if props is not None else
        tuple(1.0 if i == NEUTRAL else 0.0 for i in range(len(EMOTIONS))),
        valence_mean=float(val_mean) if val_mean is not None else 0.0,
        arousal_mean=float(aro_mean) if aro_mean is not None else 0.0,
        gaze_mean=(float(gaze_mean[0]), float(gaze_mean[1])) if gaze_mean is not None else (0.0, 0.0),
        volume_mean=float(vol_mean) if vol_mean is not None else NEUTRAL_VOLUME_DB,
        representative_gestures=tuple(gestures),
        footprints=_footprints(f.bbox_center),
        coverage={
            "emotion": emo_count / n if n else 0.0,
            "valence": val_count / n if n else 0.0,
            "arousal": aro_count / n if n else 0.0,
            "gaze": gaze_count / n if n else 0.0,
            "volume": vol_count / n_audio if n_audio else 0.0,
            "pose": pose_count / n if n else 0.0,
        },
    )


# ---------------------------------------------------------------------------
# gaze heatmap


def gaze_heatmap_counts(angles: np.ndarray, grid: int = HEATMAP_GRID) -> np.ndarray:
    """(grid, grid) counts, rows = yaw bins, columns = pitch bins, both over
    [-pi/2, pi/2]; out-of-range samples clamp to the edge bins."""
    rows = angles[~np.isnan(angles).any(axis=1)]
    counts = np.zeros((grid, grid), dtype=int)
    if len(rows) == 0:
        return counts
    span = 2.0 * HEATMAP_HALF_RANGE
    bins = np.floor((rows + HEATMAP_HALF_RANGE) / span * grid).astype(int)
    bins = np.clip(bins, 0, grid - 1)
    np.add.at(counts, (bins[:, 0], bins[:, 1]), 1)
    return counts


def gaze_heatmap(obj: FeatureBundle | BundleView, grid: int = HEATMAP_GRID) -> np.ndarray:
    return gaze_heatmap_counts(as_view(obj).frames.gaze_angles, grid)


# ---------------------------------------------------------------------------
# time slices


@dataclass(frozen=True, eq=False)
class WordSegment:
    text: str
    start_s: float
    end_s: float
    sentence_index: int
    split: bool
    effectiveness: float | None


@dataclass(frozen=True, eq=False)
class SentenceSpan:
    index: int
    start_s: float
    end_s: float
    text: str
    effectiveness: float | None


@dataclass(frozen=True, eq=False)
class TimeSlice:
    index: int
    start_s: float
    end_s: float
    valence_mean: float | None
    arousal_mean: float | None
    emotion_proportions: tuple[float, ...] | None
    gaze_heatmap: np.ndarray
    footprints: tuple[tuple[float, float], ...]
    representative_pose: np.ndarray | None
    audio_samples: tuple[tuple[float, float | None, float | None], ...]
    words: tuple[WordSegment, ...]
    counts: Mapping[str, int]


@dataclass(frozen=True, eq=False)
class TimeSliceView:
    start_s: float
    end_s: float
    slices: tuple[TimeSlice, ...]
    sentences: tuple[SentenceSpan, ...]


def time_slices(obj: FeatureBundle | BundleView, n: int = TIME_SLICE_COUNT, *,
                sentence_scores: Mapping[int, float | None] | None = None) -> TimeSliceView:
    """``n`` equal-duration half-open slices of the span, each aggregated for
    glyph display. Words crossing a boundary are split at it; every part keeps
    its sentence's effectiveness score (caller-provided, may be absent)."""
    view = as_view(obj)
    if not view.span_duration_s > 0 or n < 1:
        raise RangeError("time slices need a positive span and n >= 1")
    scores = sentence_scores or {}
    edges = np.linspace(view.span_start_s, view.span_end_s, n + 1)
    f = view.frames
    ts = f.timestamps_s
    audio_t = view.audio.times_s

    slices: list[TimeSlice] = []
    for i in range(n):
        lo_t, hi_t = float(edges[i]), float(edges[i + 1])
        lo, hi = np.searchsorted(ts, (lo_t, hi_t), side="left")
        a_lo, a_hi = np.searchsorted(audio_t, (lo_t, hi_t), side="left")
        sub = f.sliced(int(lo), int(hi))

        props, emo_count = _emotion_proportions(sub.emotion)
        val_mean, val_count = _channel_mean(sub.valence)
        aro_mean, aro_count = _channel_mean(sub.arousal)
        gaze_count = int(np.count_nonzero(~np.isnan(sub.gaze_angles).any(axis=1)))

        rep_pose = None
        pose_ok = [j for j in range(len(sub)) if not np.isnan(sub.keypoints[j]).any()]
        if pose_ok:
            try:
                vecs = np.stack([normalize_pose(sub.keypoints[j]) for j in pose_ok])
                rep_pose = sub.keypoints[pose_ok[representative_pose(vecs)]]
            except DegeneratePose:
                rep_pose = None

        intensity = view.audio.intensity_db[a_lo:a_hi]
        pitch = view.audio.pitch_hz[a_lo:a_hi]
        t_audio = audio_t[a_lo:a_hi]
        stride = max(1, math.ceil(len(t_audio) / AUDIO_SAMPLES_PER_SLICE))
        audio_samples = tuple(
            (
                float(t_audio[j]),
                None if math.isnan(intensity[j]) else float(intensity[j]),
                None if math.isnan(pitch[j]) else float(pitch[j]),
            )
            for j in range(0, len(t_audio), stride)
        )

        words: list[WordSegment] = []
        for s in view.sentences:
            for w in s.words:
                if w.start_s < hi_t and w.end_s > lo_t:
                    seg_lo, seg_hi = max(w.start_s, lo_t), min(w.end_s, hi_t)
                    words.append(WordSegment(
                        text=w.word, start_s=seg_lo, end_s=seg_hi,
                        sentence_index=s.index,
                        split=(seg_lo > w.start_s) or (seg_hi < w.end_s),
                        effectiveness=scores.get(s.index),
                    ))
        words.sort(key=lambda w: w.start_s)

        vol_count = int(np.count_nonzero(np.isfinite(intensity)))
        slices.append(TimeSlice(
            index=i, start_s=lo_t, end_s=hi_t,
            valence_mean=None if val_mean is None else float(val_mean),
            arousal_mean=None if aro_mean is None else float(aro_mean),
            emotion_proportions=props,
            gaze_heatmap=gaze_heatmap_counts(sub.gaze_angles),
            footprints=_footprints(sub.bbox_center),
            representative_pose=rep_pose,
            audio_samples=audio_samples,
            words=tuple(words),
            counts={
                "frames": int(hi - lo),
                "emotion": emo_count,
                "valence": val_count,
                "arousal": aro_count,
                "gaze": gaze_count,
                "volume": vol_count,
                "audio": int(a_hi - a_lo),
            },
        ))

    sentences = tuple(
        SentenceSpan(index=s.index, start_s=s.start_s, end_s=s.end_s, text=s.text,
                     effectiveness=scores.get(s.index))
        for s in view.sentences
    )
    return TimeSliceView(start_s=view.span_start_s, end_s=view.span_end_s,
                         slices=tuple(slices), sentences=sentences)


# ---------------------------------------------------------------------------
# overlay trail


@dataclass(frozen=True, eq=False)
class OverlaySample:
    t_s: float
    skeleton: np.ndarray                     # (17, 2)
    gaze_origin: tuple[float, float] | None
    gaze_dir: tuple[float, float] | None     # 2-D ray direction, unit norm
    bbox_center: tuple[float, float] | None
    opacity: float


@dataclass(frozen=True, eq=False)
class OverlayTrail:
    playhead_s: float
    interval_s: float
    samples: tuple[OverlaySample, ...]  # opacity strictly increases toward playhead


def overlay_trail(obj: FeatureBundle | BundleView, playhead_s: float,
                  n: int = OVERLAY_SAMPLES, interval_s: float = 1.0) -> OverlayTrail:
    """Skeletons and gaze rays sampled at fixed intervals behind the playhead;
    older samples fade down to the minimum opacity. Missing frames are skipped."""
    view = as_view(obj)
    if not view.span_start_s <= playhead_s <= view.span_end_s:
        raise RangeError(f"playhead {playhead_s} outside span")
    if n < 1 or interval_s <= 0:
        raise RangeError("need n >= 1 and a positive interval")
    f = view.frames
    ts = f.timestamps_s
    period = 1.0 / view.meta.fps

    samples: list[OverlaySample] = []
    for i in range(n):
        t = playhead_s - (n - 1 - i) * interval_s
        if t < view.span_start_s:
            continue
        # anchored at the playhead so the current sample is exactly opaque
        opacity = 1.0 if n == 1 else 1.0 - (1.0 - OVERLAY_MIN_OPACITY) * (n - 1 - i) / (n - 1)
        idx = int(np.searchsorted(ts, t, side="left"))
        best = None
        for j in (idx - 1, idx):
            if 0 <= j < len(ts) and abs(ts[j] - t) <= period:
                if best is None or abs(ts[j] - t) < abs(ts[best] - t):
                    best = j
        if best is None or np.isnan(f.keypoints[best]).any():
            continue

        origin = None
        head = f.keypoints[best][HEAD]
        if not np.isnan(head).any():
            origin = (float(head[0]), float(head[1]))
        elif not np.isnan(f.bbox_center[best]).any():
            origin = (float(f.bbox_center[best][0]), float(f.bbox_center[best][1]))

        direction = None
        gd = f.gaze_dir[best]
        if not np.isnan(gd).any():
            norm = math.hypot(float(gd[0]), float(gd[1]))
            if norm > 1e-9:
                direction = (float(gd[0]) / norm, float(gd[1]) / norm)
        elif not np.isnan(f.gaze_angles[best]).any():
            yaw, pitch = float(f.gaze_angles[best][0]), float(f.gaze_angles[best][1])
            dx, dy = math.sin(yaw), -math.sin(pitch)
            norm = math.hypot(dx, dy)
            if norm > 1e-9:
                direction = (dx / norm, dy / norm)

        bbox = None
        if not np.isnan(f.bbox_center[best]).any():
            bbox = (float(f.bbox_center[best][0]), float(f.bbox_center[best][1]))

        samples.append(OverlaySample(
            t_s=float(ts[best]), skeleton=f.keypoints[best],
            gaze_origin=origin, gaze_dir=direction, bbox_center=bbox,
            opacity=float(opacity),
        ))
    return OverlayTrail(playhead_s=playhead_s, interval_s=interval_s, samples=tuple(samples))


# ---------------------------------------------------------------------------
# serialization


def twin_to_doc(t: SpeechTwinSummary) -> dict:
    return {
        "emotion_proportions": list(t.emotion_proportions),
        "valence_mean": t.valence_mean,
        "arousal_mean": t.arousal_mean,
        "gaze_mean": list(t.gaze_mean),
        "volume_mean": t.volume_mean,
        "representative_gestures": [
            {"pose": [[float(x), float(y)] for x, y in g.pose], "weight": g.weight}
            for g in t.representative_gestures
        ],
        "footprints": [list(p) for p in t.footprints],
        "coverage": dict(t.coverage),
    }


def _pose_doc(pose: np.ndarray | None) -> list | None:
    if pose is None:
        return None
    return [[float(x), float(y)] for x, y in pose]


def slices_to_doc(v: TimeSliceView) -> dict:
    return {
        "start_s": v.start_s,
        "end_s": v.end_s,
        "slices": [
            {
                "index": s.index,
                "start_s": s.start_s,
                "end_s": s.end_s,
                "valence_mean": s.valence_mean,
                "arousal_mean": s.arousal_mean,
                "emotion_proportions": None if s.emotion_proportions is None else list(s.emotion_proportions),
                "gaze_heatmap": s.gaze_heatmap.tolist(),
                "footprints": [list(p) for p in s.footprints],
                "representative_pose": _pose_doc(s.representative_pose),
                "audio_samples": [list(a) for a in s.audio_samples],
                "words": [
                    {
                        "text": w.text,
                        "start_s": w.start_s,
                        "end_s": w.end_s,
                        "sentence_index": w.sentence_index,
                        "split": w.split,
                        "effectiveness": w.effectiveness,
                    }
                    for w in s.words
                ],
                "counts": dict(s.counts),
            }
            for s in v.slices
        ],
        "sentences": [
            {
                "index": s.index,
                "start_s": s.start_s,
                "end_s": s.end_s,
                "text": s.text,
                "effectiveness": s.effectiveness,
            }
            for s in v.sentences
        ],
    }


def overlay_to_doc(o: OverlayTrail) -> dict:
    return {
        "playhead_s": o.playhead_s,
        "interval_s": o.interval_s,
        "samples": [
            {
                "t_s": s.t_s,
                "skeleton": _pose_doc(s.skeleton),
                "gaze_origin": None if s.gaze_origin is None else list(s.gaze_origin),
                "gaze_dir": None if s.gaze_dir is None else list(s.gaze_dir),
                "bbox_center": None if s.bbox_center is None else list(s.bbox_center),
                "opacity": s.opacity,
            }
            for s in o.samples
        ],
    }


def encodings_doc() -> dict:
    """Glyph mapping table and palettes served to the UI."""
    return {
        "glyph": GLYPH_ENCODINGS,
        "emotions": list(EMOTIONS),
        "neutral_index": NEUTRAL,
        "emotion_palettes": {k: list(v) for k, v in EMOTION_PALETTE.items()},
        "effectiveness_scale": list(EFFECTIVENESS_SCALE),
        "non_significant_color": NON_SIGNIFICANT_COLOR,
        "time_slices": TIME_SLICE_COUNT,
        "heatmap_grid": HEATMAP_GRID,
    }
