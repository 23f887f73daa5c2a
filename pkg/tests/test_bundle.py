import copy
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from podium.bundle import (
    bundle_from_doc,
    bundle_to_doc,
    count_syllables,
    dump_bundle,
    load_bundle,
    slice_bundle,
)
from podium.errors import InvariantError, RangeError, SchemaError
from podium.synth import SynthProfile, synth_bundle

from conftest import minimal_doc


# ---------------------------------------------------------------------------
# loading and validation


def test_minimal_roundtrip(mini_doc):
    b = bundle_from_doc(mini_doc)
    assert len(b.frames) == 2
    assert len(b.script.sentences) == 1
    assert b.script.sentences[0].words[0].syllables == 2
    assert bundle_to_doc(b) == mini_doc


def test_load_dump_bytes_roundtrip(bundle):
    raw = dump_bundle(bundle)
    again = load_bundle(raw)
    assert dump_bundle(again) == raw


def test_valence_out_of_range(mini_doc):
    mini_doc["frames"]["valence"][1] = 1.5
    with pytest.raises(InvariantError) as e:
        bundle_from_doc(mini_doc)
    assert "frames.valence" in str(e.value)


def test_short_embedding(mini_doc):
    mini_doc["script"]["sentences"][0]["embedding"] = [0.0] * 511
    with pytest.raises(InvariantError) as e:
        bundle_from_doc(mini_doc)
    assert "script.sentences[0].embedding" in str(e.value)


def test_missing_field_names_path(mini_doc):
    del mini_doc["frames"]["gaze_dir"]
    with pytest.raises(SchemaError) as e:
        bundle_from_doc(mini_doc)
    assert "gaze_dir" in str(e.value)


def test_extra_top_level_key(mini_doc):
    mini_doc["bogus"] = 1
    with pytest.raises(SchemaError):
        bundle_from_doc(mini_doc)


def test_non_monotone_timestamps(mini_doc):
    mini_doc["frames"]["timestamps_s"] = [0.5, 0.5]
    with pytest.raises(InvariantError) as e:
        bundle_from_doc(mini_doc)
    assert "timestamps" in str(e.value)


def test_non_unit_gaze(mini_doc):
    mini_doc["frames"]["gaze_dir"][0] = [1.0, 1.0, 1.0]
    with pytest.raises(InvariantError) as e:
        bundle_from_doc(mini_doc)
    assert "gaze_dir" in str(e.value)


def test_overlapping_sentences():
    doc = minimal_doc(n_frames=4, n_sentences=2)
    doc["script"]["sentences"][1]["start_s"] = doc["script"]["sentences"][0]["end_s"] - 0.5
    with pytest.raises(InvariantError):
        bundle_from_doc(doc)


def test_word_outside_sentence(mini_doc):
    mini_doc["script"]["sentences"][0]["words"][0]["start_s"] = 0.0
    with pytest.raises(InvariantError):
        bundle_from_doc(mini_doc)


def test_bad_level(mini_doc):
    mini_doc["meta"]["level"] = 7
    with pytest.raises(InvariantError) as e:
        bundle_from_doc(mini_doc)
    assert "meta.level" in str(e.value)


def test_emotion_category_range(mini_doc):
    mini_doc["frames"]["emotion"][0] = 9
    with pytest.raises(InvariantError):
        bundle_from_doc(mini_doc)


def test_syllable_fallback(mini_doc):
    del mini_doc["script"]["sentences"][0]["words"][0]["syllables"]
    b = bundle_from_doc(mini_doc)
    assert b.script.sentences[0].words[0].syllables == count_syllables("hello")


def test_count_syllables():
    assert count_syllables("hello") == 2
    assert count_syllables("rhythm") == 1  # vowel-letter groups only, min 1
    assert count_syllables("audience") == 3
    assert count_syllables("xyz") == 1


def test_invalid_json_bytes():
    with pytest.raises(SchemaError):
        load_bundle(b"{nope")


# Mutation fuzz: any single corruption of a valid document must surface as a
# typed error (or leave the document valid), never as a crash.
_MUTATIONS = [
    lambda d: d["frames"].pop("valence"),
    lambda d: d["frames"]["valence"].append(0.0),
    lambda d: d["frames"]["valence"].__setitem__(0, "x"),
    lambda d: d["frames"]["valence"].__setitem__(0, -2.0),
    lambda d: d["frames"]["gaze_dir"].__setitem__(0, [2.0, 0.0, 0.0]),
    lambda d: d["frames"]["gaze_angles"].__setitem__(0, [0.1]),
    lambda d: d["frames"]["keypoints"].__setitem__(0, [[0.0, 0.0]] * 16),
    lambda d: d["frames"]["bbox_center"].__setitem__(0, [1.5, 0.5]),
    lambda d: d["frames"]["camera_angle_deg"].__setitem__(0, -1.0),
    lambda d: d["meta"].pop("fps"),
    lambda d: d["meta"].__setitem__("fps", 0.0),
    lambda d: d["meta"].__setitem__("duration_s", -3.0),
    lambda d: d["meta"].__setitem__("year", "2020"),
    lambda d: d["audio"].pop("hop_s"),
    lambda d: d["audio"]["pitch_hz"].append(100.0),
    lambda d: d["script"]["sentences"][0].pop("embedding"),
    lambda d: d["script"]["sentences"][0]["words"][0].__setitem__("syllables", 0),
    lambda d: d["script"]["sentences"][0].__setitem__("end_s", 0.0),
    lambda d: d.__setitem__("schema_version", 2),
    lambda d: d.pop("audio"),
]


@pytest.mark.parametrize("mutate", _MUTATIONS, ids=range(len(_MUTATIONS)))
def test_mutation_fuzz_yields_typed_error(mutate):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises((SchemaError, InvariantError)):
        bundle_from_doc(doc)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_roundtrip_property(seed):
    b = synth_bundle(seed, SynthProfile(duration_s=8.0, fps=4.0, sentence_count=2))
    raw = dump_bundle(b)
    assert dump_bundle(load_bundle(raw)) == raw


# ---------------------------------------------------------------------------
# slicing


def test_slice_full_duration_is_identity(bundle):
    v = slice_bundle(bundle, 0.0, bundle.meta.duration_s)
    assert len(v.frames) == len(bundle.frames)
    assert len(v.audio) == len(bundle.audio)
    assert len(v.sentences) == len(bundle.script.sentences)


def test_slice_partition_counts(bundle):
    d = bundle.meta.duration_s
    a = slice_bundle(bundle, 0.0, d / 2)
    b = slice_bundle(bundle, d / 2, d)
    assert len(a.frames) + len(b.frames) == len(bundle.frames)
    assert len(a.audio) + len(b.audio) == len(bundle.audio)


def test_slice_half_open_membership():
    doc = minimal_doc(n_frames=2)
    doc["meta"]["duration_s"] = 4.0
    doc["meta"]["fps"] = 1.0
    doc["frames"]["timestamps_s"] = [1.0, 2.0]
    # pad channels to length 2 already; slice [1.5, 2.5) must keep only t=2
    b = bundle_from_doc(doc)
    v = slice_bundle(b, 1.5, 2.5)
    assert list(v.frames.timestamps_s) == [2.0]
    v2 = slice_bundle(b, 1.0, 2.0)  # half-open: t=2 goes to the later slice
    assert list(v2.frames.timestamps_s) == [1.0]


def test_slice_does_not_mutate_source(bundle):
    before = bundle.frames.timestamps_s.copy()
    slice_bundle(bundle, 5.0, 20.0)
    assert np.array_equal(bundle.frames.timestamps_s, before)
    with pytest.raises(ValueError):
        bundle.frames.timestamps_s[0] = -1  # read-only arrays


def test_slice_bounds_errors(bundle):
    d = bundle.meta.duration_s
    with pytest.raises(RangeError):
        slice_bundle(bundle, -1.0, 5.0)
    with pytest.raises(RangeError):
        slice_bundle(bundle, 0.0, d + 1.0)
    with pytest.raises(RangeError):
        slice_bundle(bundle, 5.0, 5.0)
    with pytest.raises(RangeError):
        slice_bundle(bundle, 6.0, 5.0)


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_slice_nesting_associative(data, bundle):
    d = bundle.meta.duration_s
    a = data.draw(st.floats(0.0, d - 1.0))
    c = data.draw(st.floats(a + 0.5, d))
    a2 = data.draw(st.floats(a, c - 0.25))
    c2 = data.draw(st.floats(a2 + 0.25, c))
    nested = slice_bundle(slice_bundle(bundle, a, c), a2, c2)
    direct = slice_bundle(bundle, a2, c2)
    assert np.array_equal(nested.frames.timestamps_s, direct.frames.timestamps_s)
    assert np.array_equal(nested.audio.times_s, direct.audio.times_s)
    assert [s.index for s in nested.sentences] == [s.index for s in direct.sentences]


def test_sentence_overlap_selection(bundle):
    s = bundle.script.sentences[2]
    mid = (s.start_s + s.end_s) / 2
    v = slice_bundle(bundle, mid, mid + 0.05)
    assert any(x.index == s.index for x in v.sentences)
