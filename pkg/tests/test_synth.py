import numpy as np
import pytest

from podium.bundle import dump_bundle
from podium.factors import FactorId, compute_factors
from podium.synth import SynthProfile, synth_bundle


def test_same_seed_byte_identical():
    a = synth_bundle(42)
    b = synth_bundle(42)
    assert dump_bundle(a) == dump_bundle(b)


def test_different_seeds_differ():
    assert dump_bundle(synth_bundle(1)) != dump_bundle(synth_bundle(2))


def test_constant_valence_average():
    b = synth_bundle(5, SynthProfile.constant(valence_base=0.3))
    fv = compute_factors(b)
    assert fv.value(FactorId.VALENCE_AVERAGE) == pytest.approx(0.3, abs=1e-12)


def test_sentence_layout():
    b = synth_bundle(9, SynthProfile(duration_s=70.0, sentence_count=10))
    sents = b.script.sentences
    assert len(sents) == 10
    assert sents[0].start_s >= 0.0
    assert sents[-1].end_s <= 70.0
    for a, c in zip(sents, sents[1:]):
        assert a.end_s <= c.start_s
    for s in sents:
        for w in s.words:
            assert s.start_s - 1e-9 <= w.start_s <= w.end_s <= s.end_s + 1e-9


def test_profile_validation():
    with pytest.raises(ValueError):
        SynthProfile(duration_s=-1.0).validate()
    with pytest.raises(ValueError):
        SynthProfile(level=9).validate()
    with pytest.raises(ValueError):
        SynthProfile(words_per_sentence=(5, 2)).validate()
    with pytest.raises(ValueError):
        synth_bundle(1, SynthProfile(missing_rate=1.0))


def test_level_override():
    b = synth_bundle(3, SynthProfile(level=4))
    assert b.meta.level == 4


def test_jittered_profiles_vary():
    rng = np.random.default_rng(0)
    base = SynthProfile()
    j1 = base.jittered(rng)
    j2 = base.jittered(rng)
    assert j1.pitch_base != j2.pitch_base
    va = compute_factors(synth_bundle(1, j1)).value(FactorId.VOLUME_AVERAGE)
    vb = compute_factors(synth_bundle(1, j2)).value(FactorId.VOLUME_AVERAGE)
    assert va != vb


def test_missing_rate_produces_gaps():
    b = synth_bundle(8, SynthProfile(missing_rate=0.3))
    assert np.isnan(b.frames.valence).any()
    assert np.isnan(b.frames.keypoints).any()
