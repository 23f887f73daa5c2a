import json
import os

import numpy as np
import pytest

from podium.bundle import dump_bundle
from podium.corpus import speech_entry
from podium.errors import DuplicateId, NotFound, StorageError
from podium.factors import ALL_FACTORS, compute_factors
from podium.store import CorpusStore, bundle_sha256
from podium.synth import SynthProfile, synth_bundle

PROFILE = SynthProfile(duration_s=12.0, fps=5.0, sentence_count=3)


@pytest.fixture()
def store(tmp_path):
    return CorpusStore(tmp_path / "corpus")


def test_ingest_get_roundtrip(store):
    b = synth_bundle(1, PROFILE)
    sid = store.ingest(b)
    assert sid == b.meta.speech_id
    again = store.get_bundle(sid)
    assert dump_bundle(again) == dump_bundle(b)


def test_duplicate_id(store):
    b = synth_bundle(1, PROFILE)
    store.ingest(b)
    with pytest.raises(DuplicateId):
        store.ingest(b)
    store.ingest(b, force=True)  # replacement allowed with force


def test_unknown_id(store):
    store.ingest(synth_bundle(1, PROFILE))
    with pytest.raises(NotFound):
        store.get_bundle("missing")


def test_snapshot_isolation(store):
    empty = store.snapshot()
    assert len(empty) == 0
    store.ingest(synth_bundle(1, PROFILE))
    snap = store.snapshot()
    assert len(snap) == 1
    store.ingest(synth_bundle(2, PROFILE))
    assert len(snap) == 1  # unchanged after later ingest
    assert len(store.snapshot()) == 2


def test_snapshot_factors_match_recompute(store):
    b = synth_bundle(3, PROFILE)
    store.ingest(b)
    snap = store.snapshot()
    entry = snap.speeches()[0]
    fresh = compute_factors(b)
    for f in ALL_FACTORS:
        assert entry.factors.value(f) == fresh.value(f)
    direct = speech_entry(b)
    for got, want in zip(entry.sentences, direct.sentences):
        assert got.factors.to_doc() == want.factors.to_doc()
        assert np.allclose(got.embedding, want.embedding)


def test_reopen_same_index(store, tmp_path):
    store.ingest(synth_bundle(1, PROFILE))
    store.ingest(synth_bundle(2, PROFILE))
    reopened = CorpusStore(store.root, create=False)
    assert reopened.ids() == store.ids()
    assert len(reopened.snapshot()) == 2


def test_crash_between_write_and_rename(store, monkeypatch):
    store.ingest(synth_bundle(1, PROFILE))
    before = store.ids()

    real_replace = os.replace

    def boom(src, dst):
        raise RuntimeError("injected crash")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(RuntimeError):
        store.ingest(synth_bundle(2, PROFILE))
    monkeypatch.setattr(os, "replace", real_replace)

    reopened = CorpusStore(store.root, create=False)
    assert reopened.ids() == before  # index unchanged on reopen
    assert len(reopened.snapshot()) == 1


def test_hash_verification(store):
    b = synth_bundle(4, PROFILE)
    sid = store.ingest(b)
    path = store.root / sid / "bundle.json"
    doc = json.loads(path.read_text())
    doc["meta"]["title"] = "tampered"
    path.write_text(json.dumps(doc, separators=(",", ":")))
    with pytest.raises(StorageError):
        store.get_bundle(sid)


def test_snapshot_pins_bundle_hash(store):
    b = synth_bundle(5, PROFILE)
    sid = store.ingest(b)
    snap = store.snapshot()
    # replace the speech after the snapshot: lazy bundle loads must refuse
    replacement = synth_bundle(6, PROFILE, speech_id=sid)
    store.ingest(replacement, force=True)
    with pytest.raises(StorageError):
        snap.bundle(sid)
    assert dump_bundle(store.snapshot().bundle(sid)) == dump_bundle(replacement)


def test_stale_cache_recomputed(store):
    b = synth_bundle(7, PROFILE)
    sid = store.ingest(b)
    fpath = store.root / sid / "factors.json"
    doc = json.loads(fpath.read_text())
    doc["bundle_sha256"] = "0" * 64  # simulate a cache from another bundle
    fpath.write_text(json.dumps(doc))
    snap = store.snapshot()
    entry = snap.speeches()[0]
    fresh = compute_factors(b)
    for f in ALL_FACTORS:
        assert entry.factors.value(f) == fresh.value(f)


def test_content_hash_is_canonical(store):
    b = synth_bundle(8, PROFILE)
    sid = store.ingest(b)
    index = json.loads((store.root / "index.json").read_text())
    assert index["speeches"][sid]["bundle_sha256"] == bundle_sha256(dump_bundle(b))
