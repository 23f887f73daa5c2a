"""The 23 presentation-technique factors and the series statistics behind them.

Six technique groups (facial expression, eye contact, use of stage, body
gesture, voice, pace) contribute one factor per feature/statistic pair.
Statistics skip missing samples and report the surviving coverage fraction;
a factor whose series carries too little data is undefined, never an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bundle import (
    BundleView,
    FeatureBundle,
    HEAD,
    L_SHOULDER,
    R_SHOULDER,
    Sentence,
    THORAX,
    UPPER_BODY,
    as_view,
)
from .errors import (
    DegenerateMean,
    DegeneratePose,
    EmptySeries,
    InsufficientFrames,
    InvariantError,
)

MEAN_EPS = 1e-9
WATCHING_THRESHOLD_DEG = 5.0


class Technique(str, Enum):
    FACIAL_EXPRESSION = "facial expression"
    EYE_CONTACT = "eye contact"
    USE_OF_STAGE = "use of stage"
    BODY_GESTURE = "body gesture"
    VOICE = "voice"
    PACE = "pace"


class Statistic(str, Enum):
    AVERAGE = "average"
    VOLATILITY = "volatility"
    DISPERSION = "dispersion"
    RATIO = "ratio"
    DIVERSITY = "diversity"


class FactorId(Enum):
    """The 23 factors; ``value`` is the stable serialization id."""

    EMOTION_DIVERSITY = ("face.emotion.diversity", Technique.FACIAL_EXPRESSION, "emotion type", Statistic.DIVERSITY)
    VALENCE_VOLATILITY = ("face.valence.volatility", Technique.FACIAL_EXPRESSION, "valence", Statistic.VOLATILITY)
    VALENCE_AVERAGE = ("face.valence.average", Technique.FACIAL_EXPRESSION, "valence", Statistic.AVERAGE)
    AROUSAL_VOLATILITY = ("face.arousal.volatility", Technique.FACIAL_EXPRESSION, "arousal", Statistic.VOLATILITY)
    AROUSAL_AVERAGE = ("face.arousal.average", Technique.FACIAL_EXPRESSION, "arousal", Statistic.AVERAGE)

    GAZE_VOLATILITY = ("eye.gaze.volatility", Technique.EYE_CONTACT, "gaze direction", Statistic.VOLATILITY)
    GAZE_DISPERSION = ("eye.gaze.dispersion", Technique.EYE_CONTACT, "gaze direction", Statistic.DISPERSION)
    WATCHING_CAMERA_RATIO = ("eye.camera.ratio", Technique.EYE_CONTACT, "watching camera", Statistic.RATIO)

    DISTANCE_VOLATILITY = ("stage.distance.volatility", Technique.USE_OF_STAGE, "distance from camera", Statistic.VOLATILITY)
    DISTANCE_DISPERSION = ("stage.distance.dispersion", Technique.USE_OF_STAGE, "distance from camera", Statistic.DISPERSION)
    POSITION_VOLATILITY = ("stage.position.volatility", Technique.USE_OF_STAGE, "position in frame", Statistic.VOLATILITY)
    POSITION_DISPERSION = ("stage.position.dispersion", Technique.USE_OF_STAGE, "position in frame", Statistic.DISPERSION)

    ENERGY_VOLATILITY = ("gesture.energy.volatility", Technique.BODY_GESTURE, "gesture energy", Statistic.VOLATILITY)
    ENERGY_AVERAGE = ("gesture.energy.average", Technique.BODY_GESTURE, "gesture energy", Statistic.AVERAGE)
    GESTURE_DIVERSITY = ("gesture.pose.diversity", Technique.BODY_GESTURE, "gesture diversity", Statistic.DIVERSITY)

    VOLUME_VOLATILITY = ("voice.volume.volatility", Technique.VOICE, "volume", Statistic.VOLATILITY)
    VOLUME_AVERAGE = ("voice.volume.average", Technique.VOICE, "volume", Statistic.AVERAGE)
    PITCH_VOLATILITY = ("voice.pitch.volatility", Technique.VOICE, "pitch", Statistic.VOLATILITY)
    PITCH_AVERAGE = ("voice.pitch.average", Technique.VOICE, "pitch", Statistic.AVERAGE)

    RATE_VOLATILITY = ("pace.rate.volatility", Technique.PACE, "speaking rate", Statistic.VOLATILITY)
    RATE_AVERAGE = ("pace.rate.average", Technique.PACE, "speaking rate", Statistic.AVERAGE)
    PAUSE_VOLATILITY = ("pace.pause.volatility", Technique.PACE, "pauses", Statistic.VOLATILITY)
    PAUSE_AVERAGE = ("pace.pause.average", Technique.PACE, "pauses", Statistic.AVERAGE)

    def __new__(cls, id_str: str, technique: Technique, feature: str, statistic: Statistic):
        obj = object.__new__(cls)
        obj._value_ = id_str
        obj.technique = technique
        obj.feature = feature
        obj.statistic = statistic
        return obj

    @property
    def id(self) -> str:
        return self.value

    @classmethod
    def from_id(cls, id_str: str) -> "FactorId":
        try:
            return cls(id_str)
        except ValueError:
            raise KeyError(f"unknown factor id {id_str!r}") from None


ALL_FACTORS: tuple[FactorId, ...] = tuple(FactorId)
assert len(ALL_FACTORS) == 23


# ---------------------------------------------------------------------------
# series statistics


def _finite(series) -> np.ndarray:
    x = np.asarray(
        [np.nan if v is None else v for v in series] if isinstance(series, (list, tuple)) else series,
        dtype=float,
    )
    return x[np.isfinite(x)]


def _is_constant(x: np.ndarray) -> bool:
    # Relative spread below float-noise level counts as constant, so that
    # channels assembled from repeated identical values score an exact zero
    # even when accumulated timestamps carry rounding dust.
    lo, hi = float(x.min()), float(x.max())
    return hi - lo <= 1e-12 * max(abs(lo), abs(hi))


def average(series) -> float:
    """Arithmetic mean over non-missing samples."""
    x = _finite(series)
    if x.size == 0:
        raise EmptySeries("average of an all-missing series")
    return float(x.mean())


def volatility(series) -> float | None:
    """Length- and scale-invariant complexity of a series.

    Samples are z-normalized (population sd), the complexity estimate is the
    root of the summed squared first differences, and the result is divided
    by sqrt(n - 1) so series of different lengths compare. Returns 0 for a
    constant series and None when fewer than 3 samples survive.
    """
    x = _finite(series)
    if x.size == 0:
        raise EmptySeries("volatility of an all-missing series")
    if x.size < 3:
        return None
    if _is_constant(x):
        return 0.0
    sd = float(x.std())
    if sd == 0.0 or not math.isfinite(sd):
        return 0.0  # spread too small for the variance to survive underflow
    z = (x - x.mean()) / sd
    ce = math.sqrt(float(np.sum(np.diff(z) ** 2)))
    return ce / math.sqrt(x.size - 1)


def dispersion(series) -> float | None:
    """Coefficient of variation: population sd over |mean|."""
    x = _finite(series)
    if x.size == 0:
        raise EmptySeries("dispersion of an all-missing series")
    if x.size < 2:
        return None
    mean = float(x.mean())
    if abs(mean) <= MEAN_EPS:
        raise DegenerateMean(f"|mean| = {abs(mean):.3e} <= {MEAN_EPS}")
    if _is_constant(x):
        return 0.0
    return float(x.std()) / abs(mean)


def watching_camera_ratio(angles_deg, threshold_deg: float = WATCHING_THRESHOLD_DEG) -> float:
    """Fraction of non-missing frames with view angle strictly below the threshold."""
    x = _finite(angles_deg)
    if x.size == 0:
        raise EmptySeries("watching-camera ratio of an all-missing series")
    return float(np.count_nonzero(x < threshold_deg)) / x.size


def emotion_diversity(emotions: Iterable) -> float:
    """Sample-weighted log-proportion sum over emotion categories (<= 0).

    For each sample i let r_i be the proportion of samples sharing sample i's
    category; the result is sum_i r_i * ln(r_i), taken literally, so a
    single-category series scores 0 and mixing pushes the value negative.
    """
    cats = _category_list(emotions)
    if not cats:
        raise EmptySeries("diversity of an all-missing series")
    total = len(cats)
    counts: dict = {}
    for c in cats:
        counts[c] = counts.get(c, 0) + 1
    return sum(n * (n / total) * math.log(n / total) for n in counts.values())


def emotion_type_diversity(emotions: Iterable) -> float:
    """Type-level variant: sum_k p_k * ln(p_k) over distinct categories (<= 0).

    Not the default; exposed for comparison with the sample-weighted form.
    """
    cats = _category_list(emotions)
    if not cats:
        raise EmptySeries("diversity of an all-missing series")
    total = len(cats)
    counts: dict = {}
    for c in cats:
        counts[c] = counts.get(c, 0) + 1
    return sum((n / total) * math.log(n / total) for n in counts.values())


def _category_list(emotions: Iterable) -> list:
    out = []
    for v in emotions:
        if v is None:
            continue
        if isinstance(v, float) and math.isnan(v):
            continue
        out.append(v)
    return out


def _volatility_2d(xy: np.ndarray) -> float | None:
    """L2 composition of per-component volatilities over rows of (n, 2)."""
    rows = xy[~np.isnan(xy).any(axis=1)]
    if rows.shape[0] < 3:
        return None
    parts = [volatility(rows[:, c]) for c in range(rows.shape[1])]
    return float(math.hypot(*parts))


def _dispersion_2d(xy: np.ndarray) -> float | None:
    """L2 composition of per-component coefficients of variation."""
    rows = xy[~np.isnan(xy).any(axis=1)]
    if rows.shape[0] < 2:
        return None
    parts = [dispersion(rows[:, c]) for c in range(rows.shape[1])]
    return float(math.hypot(*parts))


# ---------------------------------------------------------------------------
# gesture features


@dataclass(frozen=True)
class MassTable:
    """Upper-body segment mass fractions, keyed by the joint carrying the segment."""

    joint_masses: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.joint_masses:
            raise InvariantError("mass_table", "must list at least one segment")
        for joint, m in self.joint_masses:
            if not 0 <= joint <= 16:
                raise InvariantError("mass_table", f"joint index {joint} outside 0..16")
            if m <= 0:
                raise InvariantError("mass_table", f"mass fraction {m} must be > 0")

    @classmethod
    def default(cls) -> "MassTable":
        # Plagenhoef-style fractions; each segment is assigned to its distal
        # joint (trunk to the thorax, head to the head, upper arms to the
        # elbows, forearm + hand combined to the wrists).
        return cls((
            (HEAD, 0.0826),
            (THORAX, 0.4684),
            (12, 0.0325), (15, 0.0325),          # elbows <- upper arms
            (13, 0.0187 + 0.0065), (16, 0.0187 + 0.0065),  # wrists <- forearm + hand
        ))


DEFAULT_MASS_TABLE = MassTable.default()


def gesture_energy_series(keypoints: np.ndarray, mass: MassTable = DEFAULT_MASS_TABLE,
                          fps: float = 1.0) -> np.ndarray:
    """Per-frame-pair kinetic energy of the upper body.

    E_t = 1/2 * sum_j m_j * |p_{j,t} - p_{j,t-1}|^2 * fps^2 over the mass
    table's joints; a pair spanning a missing frame yields NaN.
    """
    kp = np.asarray(keypoints, dtype=float)
    if kp.ndim != 3 or kp.shape[1:] != (17, 2):
        raise InvariantError("keypoints", f"expected (n, 17, 2), got {kp.shape}")
    present = ~np.isnan(kp).any(axis=(1, 2))
    if int(np.count_nonzero(present[1:] & present[:-1])) < 1:
        raise InsufficientFrames("gesture energy needs >= 2 consecutive frames with keypoints")
    joints = np.array([j for j, _ in mass.joint_masses])
    masses = np.array([m for _, m in mass.joint_masses])
    disp = kp[1:, joints, :] - kp[:-1, joints, :]
    sq = np.sum(disp**2, axis=2)  # (n-1, joints)
    energy = 0.5 * (sq @ masses) * fps * fps
    energy[~(present[1:] & present[:-1])] = np.nan
    return energy


def normalize_pose(frame_kp: np.ndarray) -> np.ndarray:
    """Thorax-centered, shoulder-width-normalized upper-body pose vector (26,)."""
    kp = np.asarray(frame_kp, dtype=float)
    shoulder = float(np.linalg.norm(kp[L_SHOULDER] - kp[R_SHOULDER]))
    if not shoulder > 1e-9:
        raise DegeneratePose("zero shoulder width")
    vec = ((kp[list(UPPER_BODY)] - kp[THORAX]) / shoulder).ravel()
    if not float(np.linalg.norm(vec)) > 1e-12:
        raise DegeneratePose("pose vector has zero norm")
    return vec


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu <= 0 or nv <= 0:
        raise DegeneratePose("cosine distance of a zero vector")
    return 1.0 - float(np.dot(u, v)) / (nu * nv)


def gesture_diversity(keypoints: np.ndarray) -> float:
    """Population sd of cosine distances from each pose to the first present pose."""
    kp = np.asarray(keypoints, dtype=float)
    present = [i for i in range(len(kp)) if not np.isnan(kp[i]).any()]
    if len(present) < 2:
        raise InsufficientFrames("gesture diversity needs >= 2 frames with keypoints")
    vecs = [normalize_pose(kp[i]) for i in present]
    ref = vecs[0]
    d = np.array([cosine_distance(v, ref) for v in vecs])
    return float(d.std())


# ---------------------------------------------------------------------------
# script-derived series


def speaking_rate_series(sentences: Sequence[Sentence]) -> np.ndarray:
    """Seconds per syllable for every word, in script order."""
    return np.array([w.duration_s / w.syllables for s in sentences for w in s.words], dtype=float)


def pause_series(sentences: Sequence[Sentence]) -> np.ndarray:
    """Inter-word gaps within sentences merged with inter-sentence gaps.

    One series in timeline order; overlapping timestamps clamp the gap to 0.
    """
    entries: list[tuple[float, float]] = []
    for s in sentences:
        for a, b in zip(s.words, s.words[1:]):
            entries.append((a.end_s, max(0.0, b.start_s - a.end_s)))
    for a, b in zip(sentences, sentences[1:]):
        entries.append((a.end_s, max(0.0, b.start_s - a.end_s)))
    entries.sort(key=lambda e: e[0])
    return np.array([g for _, g in entries], dtype=float)


# ---------------------------------------------------------------------------
# the factor vector


@dataclass(frozen=True)
class FactorValue:
    value: float | None
    coverage: float


@dataclass(frozen=True)
class FactorVector:
    values: Mapping[FactorId, FactorValue]

    def __post_init__(self):
        if set(self.values) != set(ALL_FACTORS):
            raise InvariantError("factor_vector", "must carry exactly the 23 factors")

    def __getitem__(self, fid: FactorId) -> FactorValue:
        return self.values[fid]

    def value(self, fid: FactorId) -> float | None:
        return self.values[fid].value

    def defined(self) -> tuple[FactorId, ...]:
        return tuple(f for f in ALL_FACTORS if self.values[f].value is not None)

    def to_doc(self) -> dict:
        return {
            f.id: {"value": self.values[f].value, "coverage": self.values[f].coverage}
            for f in ALL_FACTORS
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "FactorVector":
        values = {}
        for f in ALL_FACTORS:
            entry = doc[f.id]
            raw = entry["value"]
            values[f] = FactorValue(None if raw is None else float(raw), float(entry["coverage"]))
        return cls(values)


def undefined_factors() -> FactorVector:
    """All 23 factors undefined with zero coverage (empty span placeholder)."""
    return FactorVector({f: FactorValue(None, 0.0) for f in ALL_FACTORS})


def _coverage(a: np.ndarray) -> float:
    if a.ndim > 1:
        ok = ~np.isnan(a).any(axis=tuple(range(1, a.ndim)))
    else:
        ok = np.isfinite(a)
    return float(np.count_nonzero(ok)) / len(a) if len(a) else 0.0


def _try(fn, *args) -> float | None:
    try:
        return fn(*args)
    except (EmptySeries, DegenerateMean, InsufficientFrames, DegeneratePose):
        return None


def compute_factors(obj: FeatureBundle | BundleView,
                    mass: MassTable = DEFAULT_MASS_TABLE) -> FactorVector:
    """All 23 factors for a bundle or span view. Never raises; a factor whose
    channel lacks usable data is undefined with its coverage recorded."""
    view = as_view(obj)
    f = view.frames
    fps = view.meta.fps
    out: dict[FactorId, FactorValue] = {}

    def put(fid: FactorId, value: float | None, coverage: float) -> None:
        out[fid] = FactorValue(None if value is None else float(value), coverage)

    cov_face = _coverage(f.emotion)
    put(FactorId.EMOTION_DIVERSITY, _try(emotion_diversity, f.emotion), cov_face)
    put(FactorId.VALENCE_VOLATILITY, _try(volatility, f.valence), _coverage(f.valence))
    put(FactorId.VALENCE_AVERAGE, _try(average, f.valence), _coverage(f.valence))
    put(FactorId.AROUSAL_VOLATILITY, _try(volatility, f.arousal), _coverage(f.arousal))
    put(FactorId.AROUSAL_AVERAGE, _try(average, f.arousal), _coverage(f.arousal))

    cov_gaze = _coverage(f.gaze_angles)
    put(FactorId.GAZE_VOLATILITY, _try(_volatility_2d, f.gaze_angles), cov_gaze)
    put(FactorId.GAZE_DISPERSION, _try(_dispersion_2d, f.gaze_angles), cov_gaze)
    put(FactorId.WATCHING_CAMERA_RATIO, _try(watching_camera_ratio, f.camera_angle_deg),
        _coverage(f.camera_angle_deg))

    put(FactorId.DISTANCE_VOLATILITY, _try(volatility, f.head_cam_dist), _coverage(f.head_cam_dist))
    put(FactorId.DISTANCE_DISPERSION, _try(dispersion, f.head_cam_dist), _coverage(f.head_cam_dist))
    cov_pos = _coverage(f.bbox_center)
    put(FactorId.POSITION_VOLATILITY, _try(_volatility_2d, f.bbox_center), cov_pos)
    put(FactorId.POSITION_DISPERSION, _try(_dispersion_2d, f.bbox_center), cov_pos)

    energy = _try(gesture_energy_series, f.keypoints, mass, fps)
    if energy is None:
        put(FactorId.ENERGY_VOLATILITY, None, 0.0)
        put(FactorId.ENERGY_AVERAGE, None, 0.0)
    else:
        cov_e = _coverage(energy)
        put(FactorId.ENERGY_VOLATILITY, _try(volatility, energy), cov_e)
        put(FactorId.ENERGY_AVERAGE, _try(average, energy), cov_e)
    put(FactorId.GESTURE_DIVERSITY, _try(gesture_diversity, f.keypoints), _coverage(f.keypoints))

    put(FactorId.VOLUME_VOLATILITY, _try(volatility, view.audio.intensity_db),
        _coverage(view.audio.intensity_db))
    put(FactorId.VOLUME_AVERAGE, _try(average, view.audio.intensity_db),
        _coverage(view.audio.intensity_db))
    put(FactorId.PITCH_VOLATILITY, _try(volatility, view.audio.pitch_hz), _coverage(view.audio.pitch_hz))
    put(FactorId.PITCH_AVERAGE, _try(average, view.audio.pitch_hz), _coverage(view.audio.pitch_hz))

    rates = speaking_rate_series(view.sentences)
    put(FactorId.RATE_VOLATILITY, _try(volatility, rates), 1.0 if rates.size else 0.0)
    put(FactorId.RATE_AVERAGE, _try(average, rates), 1.0 if rates.size else 0.0)
    pauses = pause_series(view.sentences)
    put(FactorId.PAUSE_VOLATILITY, _try(volatility, pauses), 1.0 if pauses.size else 0.0)
    put(FactorId.PAUSE_AVERAGE, _try(average, pauses), 1.0 if pauses.size else 0.0)

    return FactorVector(out)
