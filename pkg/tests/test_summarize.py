import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from podium.bundle import EMOTIONS, NEUTRAL, slice_bundle
from podium.errors import NoPoses, RangeError
from podium.factors import normalize_pose
from podium.summarize import (
    EFFECTIVENESS_SCALE,
    EMOTION_PALETTE,
    GLYPH_ENCODINGS,
    cluster_poses,
    encodings_doc,
    gaze_heatmap,
    gaze_heatmap_counts,
    mouth_curvature,
    mouth_width,
    overlay_trail,
    representative_pose,
    speech_twin,
    spike_protrusion,
    time_slices,
)
from podium.synth import SynthProfile, synth_bundle

from conftest import pose_frames
from test_factors import base_pose


# ---------------------------------------------------------------------------
# pose clustering


def blob_frames(rng, centers, per_blob, spread=0.004):
    frames, labels = [], []
    for label, (dx, arm) in enumerate(centers):
        for _ in range(per_blob):
            p = base_pose(dx=dx, arm=arm)
            p = p + rng.normal(0, spread, p.shape)
            frames.append(p)
            labels.append(label)
    order = rng.permutation(len(frames))
    return pose_frames([frames[i] for i in order]), [labels[i] for i in order]


def test_single_distinct_pose_single_cluster():
    kp = pose_frames([base_pose()] * 6)
    c = cluster_poses(kp, k=10, seed=1)
    assert len(c.weights) == 1
    assert c.weights[0] == 1.0
    assert np.all(c.assignments == 0)


def test_two_separated_blobs_no_cross_assignment():
    rng = np.random.default_rng(4)
    kp, labels = blob_frames(rng, [(0.0, 0.0), (0.25, 0.45)], per_blob=40)
    c = cluster_poses(kp, k=10, seed=9)
    by_cluster = {}
    for lab, cl in zip(labels, c.assignments):
        by_cluster.setdefault(int(cl), set()).add(lab)
    for members in by_cluster.values():
        assert len(members) == 1  # no component mixes the two blobs


def test_cluster_determinism():
    b = synth_bundle(31)
    c1 = cluster_poses(b.frames.keypoints, seed=12)
    c2 = cluster_poses(b.frames.keypoints, seed=12)
    assert np.array_equal(c1.assignments, c2.assignments)
    assert np.array_equal(c1.weights, c2.weights)


def test_cluster_weights_are_membership_fractions():
    rng = np.random.default_rng(5)
    kp, _ = blob_frames(rng, [(0.0, 0.0), (0.3, 0.5)], per_blob=25)
    c = cluster_poses(kp, k=2, seed=3)
    counts = np.bincount(c.assignments, minlength=len(c.weights))
    assert np.allclose(c.weights, counts / counts.sum())


def test_no_poses():
    kp = np.full((5, 17, 2), np.nan)
    with pytest.raises(NoPoses):
        cluster_poses(kp, seed=0)


def test_representative_pose_singleton():
    v = np.array([[1.0, 0.0, 0.2]])
    assert representative_pose(v) == 0


def test_representative_pose_center_of_three():
    a = np.array([1.0, 0.0])
    b = np.array([math.cos(0.5), math.sin(0.5)])
    mid = a + b
    vectors = np.stack([a, mid, b])
    assert representative_pose(vectors) == 1


def test_representative_equals_brute_force():
    rng = np.random.default_rng(8)
    for _ in range(50):
        m = int(rng.integers(1, 101))
        vectors = rng.normal(size=(m, 26))
        got = representative_pose(vectors)
        want = oracles.brute_representative(vectors.tolist())
        assert got == want


# ---------------------------------------------------------------------------
# speech twin


def test_twin_all_neutral():
    b = synth_bundle(33, SynthProfile.constant())
    t = speech_twin(b)
    assert t.emotion_proportions[NEUTRAL] == 1.0
    assert sum(t.emotion_proportions) == pytest.approx(1.0, abs=1e-12)


def test_twin_constant_valence():
    b = synth_bundle(34, SynthProfile.constant(valence_base=0.5))
    assert speech_twin(b).valence_mean == pytest.approx(0.5, abs=1e-12)


def test_twin_two_equal_pose_clusters():
    # exactly two distinct poses, equally frequent -> two clusters at 1/2 each
    rng = np.random.default_rng(6)
    kp, _ = blob_frames(rng, [(0.0, 0.0), (0.3, 0.5)], per_blob=30, spread=0.0)
    b = synth_bundle(35, SynthProfile(duration_s=12.0, fps=5.0, sentence_count=2,
                                      missing_rate=0.0))
    f = b.frames
    from podium.bundle import FrameTrack

    n = len(kp)
    track = FrameTrack(f.timestamps_s[:n], f.valence[:n], f.arousal[:n], f.emotion[:n],
                       f.gaze_dir[:n], f.gaze_angles[:n], f.camera_angle_deg[:n],
                       f.head_cam_dist[:n], f.bbox_center[:n], kp)
    view = b.view()
    object.__setattr__(view, "frames", track)
    t = speech_twin(view, pose_seed=2)
    assert len(t.representative_gestures) == 2
    assert [g.weight for g in t.representative_gestures] == pytest.approx([0.5, 0.5])


def test_twin_weights_sum_and_cap(bundle):
    t = speech_twin(bundle)
    assert len(t.representative_gestures) <= 10
    assert sum(g.weight for g in t.representative_gestures) == pytest.approx(1.0, abs=1e-9)


def test_twin_missing_channels_defaults():
    b = synth_bundle(36, SynthProfile(duration_s=8.0, fps=4.0, sentence_count=1, missing_rate=0.0))
    import numpy as np

    from podium.bundle import FrameTrack

    f = b.frames
    nanv = np.full_like(f.valence, np.nan)
    nan2 = np.full_like(f.gaze_angles, np.nan)
    nankp = np.full_like(f.keypoints, np.nan)
    track = FrameTrack(f.timestamps_s, nanv, nanv, nanv, f.gaze_dir, nan2,
                       f.camera_angle_deg, f.head_cam_dist, f.bbox_center, nankp)
    view = b.view()
    object.__setattr__(view, "frames", track)
    t = speech_twin(view)
    assert t.valence_mean == 0.0 and t.arousal_mean == 0.0
    assert t.gaze_mean == (0.0, 0.0)
    assert t.emotion_proportions[NEUTRAL] == 1.0
    assert t.representative_gestures == ()
    assert t.coverage["valence"] == 0.0 and t.coverage["pose"] == 0.0


def test_footprint_downsampling():
    b = synth_bundle(37, SynthProfile(duration_s=200.0, fps=10.0, sentence_count=12,
                                      missing_rate=0.0))
    t = speech_twin(b)
    assert 0 < len(t.footprints) <= 500


# ---------------------------------------------------------------------------
# gaze heatmap


def test_heatmap_center_bin():
    angles = np.zeros((25, 2))
    h = gaze_heatmap_counts(angles, grid=16)
    assert h.sum() == 25
    assert h[8, 8] == 25


def test_heatmap_conservation(bundle):
    h = gaze_heatmap(bundle)
    n = int(np.count_nonzero(~np.isnan(bundle.frames.gaze_angles).any(axis=1)))
    assert h.sum() == n


def test_heatmap_clamps_out_of_range():
    angles = np.array([[10.0, -10.0], [-10.0, 10.0]])
    h = gaze_heatmap_counts(angles, grid=16)
    assert h[15, 0] == 1 and h[0, 15] == 1


def test_heatmap_uniform_yaw_sweep():
    n = 10_000
    rng = np.random.default_rng(2)
    angles = np.stack([rng.uniform(-math.pi / 2, math.pi / 2, n), np.zeros(n)], axis=1)
    h = gaze_heatmap_counts(angles, grid=16)
    rows = h.sum(axis=1)
    assert rows.max() / rows.min() < 2.0


# ---------------------------------------------------------------------------
# time slices


def test_eight_equal_slices():
    b = synth_bundle(38, SynthProfile(duration_s=80.0, fps=5.0))
    v = time_slices(b)
    assert len(v.slices) == 8
    bounds = [s.start_s for s in v.slices] + [v.slices[-1].end_s]
    assert bounds == pytest.approx(list(np.arange(9) * 10.0))


def test_slice_frame_conservation(bundle):
    v = time_slices(bundle)
    assert sum(s.counts["frames"] for s in v.slices) == len(bundle.frames)
    assert sum(s.counts["audio"] for s in v.slices) == len(bundle.audio)
    for s in v.slices:
        assert s.gaze_heatmap.sum() == s.counts["gaze"]


def test_word_split_proportions():
    b = synth_bundle(39, SynthProfile(duration_s=80.0, fps=5.0))
    # hand-built: word 9.8..10.4 with slice boundary at 10 -> 1/3 + 2/3
    from podium.bundle import Sentence, Word

    w = Word("bridge", 9.8, 10.4, 2)
    sent = Sentence(0, "bridge", 9.7, 10.5, b.script.sentences[0].embedding, (w,))
    view = b.view()
    object.__setattr__(view, "sentences", (sent,))
    v = time_slices(view)
    seg1 = [x for x in v.slices[0].words if x.text == "bridge"]
    seg2 = [x for x in v.slices[1].words if x.text == "bridge"]
    assert len(seg1) == 1 and len(seg2) == 1
    assert seg1[0].split and seg2[0].split
    d1 = seg1[0].end_s - seg1[0].start_s
    d2 = seg2[0].end_s - seg2[0].start_s
    assert d1 / 0.6 == pytest.approx(1 / 3, abs=1e-9)
    assert d2 / 0.6 == pytest.approx(2 / 3, abs=1e-9)


def test_unsplit_word_not_flagged(bundle):
    v = time_slices(bundle)
    words = [w for s in v.slices for w in s.words]
    assert any(not w.split for w in words)


def test_sentence_scores_attach(bundle):
    scores = {s.index: float(s.index) for s in bundle.script.sentences}
    v = time_slices(bundle, sentence_scores=scores)
    for s in v.sentences:
        assert s.effectiveness == scores[s.index]
    for sl in v.slices:
        for w in sl.words:
            assert w.effectiveness == scores[w.sentence_index]


def test_twin_equals_slice_recombination(gapless_bundle):
    t = speech_twin(gapless_bundle)
    v = time_slices(gapless_bundle)

    def recombine(field, count_key):
        num, den = 0.0, 0
        for s in v.slices:
            c = s.counts[count_key]
            val = getattr(s, field)
            if c and val is not None:
                num += c * val
                den += c
        return num / den

    assert recombine("valence_mean", "valence") == pytest.approx(t.valence_mean, abs=1e-9)
    assert recombine("arousal_mean", "arousal") == pytest.approx(t.arousal_mean, abs=1e-9)
    total = sum(s.counts["emotion"] for s in v.slices)
    props = np.zeros(len(EMOTIONS))
    for s in v.slices:
        if s.emotion_proportions is not None:
            props += np.array(s.emotion_proportions) * s.counts["emotion"]
    assert props / total == pytest.approx(np.array(t.emotion_proportions), abs=1e-9)


def test_slices_error_on_degenerate():
    b = synth_bundle(40, SynthProfile(duration_s=8.0, fps=4.0, sentence_count=1))
    with pytest.raises(RangeError):
        time_slices(b, n=0)


# ---------------------------------------------------------------------------
# overlay trail


def test_overlay_times_and_opacity(gapless_bundle):
    o = overlay_trail(gapless_bundle, 5.0, n=10, interval_s=0.5)
    assert [round(s.t_s, 3) for s in o.samples] == [0.5 * i for i in range(1, 11)]
    ops = [s.opacity for s in o.samples]
    assert all(a < b for a, b in zip(ops, ops[1:]))
    assert ops[-1] == 1.0


def test_overlay_at_zero(gapless_bundle):
    o = overlay_trail(gapless_bundle, 0.0)
    assert len(o.samples) == 1
    assert o.samples[0].opacity == 1.0


def test_overlay_skips_missing(bundle):
    o = overlay_trail(bundle, 30.0, n=10, interval_s=1.0)
    assert len(o.samples) <= 10
    ops = [s.opacity for s in o.samples]
    assert all(a < b for a, b in zip(ops, ops[1:]))


def test_overlay_bounds(bundle):
    with pytest.raises(RangeError):
        overlay_trail(bundle, bundle.meta.duration_s + 1.0)
    with pytest.raises(RangeError):
        overlay_trail(bundle, -0.5)


def test_overlay_gaze_rays(gapless_bundle):
    o = overlay_trail(gapless_bundle, 10.0, n=5, interval_s=1.0)
    for s in o.samples:
        assert s.gaze_origin is not None
        assert s.gaze_dir is not None
        assert math.hypot(*s.gaze_dir) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# glyph encodings


@settings(max_examples=50, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_mouth_curvature_monotone(a, b):
    lo, hi = sorted((a, b))
    assert mouth_curvature(lo) <= mouth_curvature(hi)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_spike_protrusion_monotone(a, b):
    lo, hi = sorted((a, b))
    assert spike_protrusion(lo) <= spike_protrusion(hi)
    if hi - lo > 1e-9:
        assert spike_protrusion(lo) < spike_protrusion(hi)


@settings(max_examples=50, deadline=None)
@given(st.floats(30, 90), st.floats(30, 90))
def test_mouth_width_monotone(a, b):
    lo, hi = sorted((a, b))
    assert mouth_width(lo) <= mouth_width(hi)
    if hi - lo > 1e-9:
        assert mouth_width(lo) < mouth_width(hi)


def test_palettes_same_shape():
    assert len(EMOTION_PALETTE["standard"]) == len(EMOTIONS)
    assert len(EMOTION_PALETTE["colorblind"]) == len(EMOTIONS)
    assert len(EFFECTIVENESS_SCALE) == 5


def test_encodings_doc_shape():
    doc = encodings_doc()
    assert doc["neutral_index"] == NEUTRAL
    assert set(doc["emotion_palettes"]) == {"standard", "colorblind"}
    assert doc["glyph"]["mouth_width"]["domain"] == [30.0, 90.0]
