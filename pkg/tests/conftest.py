import numpy as np
import pytest

from podium.bundle import bundle_from_doc
from podium.synth import SynthProfile, synth_bundle


@pytest.fixture(scope="session")
def bundle():
    return synth_bundle(101)


@pytest.fixture(scope="session")
def gapless_bundle():
    return synth_bundle(102, SynthProfile(missing_rate=0.0))


@pytest.fixture(scope="session")
def constant_bundle():
    return synth_bundle(103, SynthProfile.constant())


def minimal_doc(n_frames: int = 2, n_sentences: int = 1) -> dict:
    """Small hand-built valid bundle document for schema tests."""
    ts = [i * 0.5 for i in range(n_frames)]
    unit = [0.0, 0.0, 1.0]
    pose = [[0.5 + 0.01 * j, 0.3 + 0.04 * j] for j in range(17)]
    sentences = []
    for i in range(n_sentences):
        start = 0.2 + i * 1.0
        sentences.append({
            "text": f"hello world {i}",
            "start_s": start,
            "end_s": start + 0.8,
            "embedding": [0.0] * 511 + [1.0],
            "words": [
                {"word": "hello", "start_s": start, "end_s": start + 0.3, "syllables": 2},
                {"word": "world", "start_s": start + 0.4, "end_s": start + 0.8, "syllables": 1},
            ],
        })
    return {
        "schema_version": 1,
        "meta": {
            "speech_id": "mini", "title": "Minimal", "year": 2021, "region": "europe",
            "level": 3, "rank": None, "online": True, "fps": 2.0,
            "duration_s": max(2.0, n_sentences * 1.2), "video_url": None,
        },
        "frames": {
            "timestamps_s": ts,
            "valence": [0.1] * n_frames,
            "arousal": [0.2] * n_frames,
            "emotion": [6] * n_frames,
            "gaze_dir": [unit] * n_frames,
            "gaze_angles": [[0.1, -0.05]] * n_frames,
            "camera_angle_deg": [4.0] * n_frames,
            "head_cam_dist": [1.0] * n_frames,
            "bbox_center": [[0.5, 0.5]] * n_frames,
            "keypoints": [pose] * n_frames,
        },
        "audio": {
            "hop_s": 0.25,
            "intensity_db": [60.0] * n_frames,
            "pitch_hz": [150.0] * n_frames,
        },
        "script": {"sentences": sentences},
    }


@pytest.fixture()
def mini_doc():
    return minimal_doc()


@pytest.fixture()
def mini_bundle(mini_doc):
    return bundle_from_doc(mini_doc)


def pose_frames(vectors_17x2: list[np.ndarray]) -> np.ndarray:
    """Stack hand-built poses into an (n, 17, 2) keypoint array."""
    return np.stack([np.asarray(v, dtype=float) for v in vectors_17x2])
