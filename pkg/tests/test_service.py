import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from podium.bundle import bundle_to_doc, slice_bundle
from podium.effectiveness import aggregate_score, builtin_model, model_to_doc
from podium.factors import ALL_FACTORS, FactorId, compute_factors
from podium.recommend import RecommendationQuery, recommend, result_to_doc
from podium.service import (
    canonical_json,
    create_app,
    factors_payload,
    pose_seed_for,
    sentence_scores_for,
)
from podium.store import CorpusStore, meta_to_doc
from podium.summarize import (
    encodings_doc,
    overlay_to_doc,
    overlay_trail,
    slices_to_doc,
    speech_twin,
    time_slices,
    twin_to_doc,
)
from podium.synth import SynthProfile, synth_bundle

PROFILE = SynthProfile(duration_s=14.0, fps=5.0, sentence_count=3, missing_rate=0.0)


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc-corpus")
    store = CorpusStore(root)
    rng = np.random.default_rng(17)
    for i in range(4):
        profile = PROFILE.jittered(rng)
        store.ingest(synth_bundle(300 + i, profile, speech_id=f"svc-{i:02d}"))
    return root


@pytest.fixture(scope="module")
def client(corpus_dir):
    store = CorpusStore(corpus_dir)
    return TestClient(create_app(store, builtin_model()))


def get_json(client, url, **kw):
    r = client.get(url, **kw)
    assert r.status_code == 200, r.content
    return json.loads(r.content)


def test_list_speeches(client):
    doc = get_json(client, "/api/speeches")
    assert doc["schema_version"] == 1
    ids = [m["speech_id"] for m in doc["speeches"]]
    assert ids == sorted(ids)
    assert len(ids) == 4


def test_empty_corpus_lists_empty(tmp_path):
    client = TestClient(create_app(CorpusStore(tmp_path / "c"), builtin_model()))
    assert get_json(client, "/api/speeches")["speeches"] == []


def test_factors_whole_speech_equals_cache(client, corpus_dir):
    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    entry = snap.speeches()[0]
    doc = get_json(client, f"/api/speeches/{entry.speech_id}/factors")
    expected = factors_payload(entry.speech_id, entry.factors, builtin_model(), None)
    assert canonical_json(doc) == canonical_json(expected)


def test_factors_span_equals_inprocess(client, corpus_dir):
    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    sid = snap.ids()[1]
    r = client.get(f"/api/speeches/{sid}/factors", params={"start": 2.0, "end": 9.0})
    fv = compute_factors(slice_bundle(snap.bundle(sid), 2.0, 9.0))
    expected = factors_payload(sid, fv, builtin_model(), (2.0, 9.0))
    assert r.content == canonical_json(expected)


def test_factors_gray_partition_matches_significance(client):
    doc = get_json(client, "/api/speeches/svc-00/factors")
    model = builtin_model()
    significant = {f.id for f in model.significant_factors()}
    for fid, entry in doc["factors"].items():
        if entry["score"] is None:
            continue
        assert entry["score"]["gray"] == (fid not in significant)


def test_factors_404(client):
    assert client.get("/api/speeches/nope/factors").status_code == 404
    body = json.loads(client.get("/api/speeches/nope/factors").content)
    assert body["error"]["code"] == "NotFound"


def test_factors_bad_span(client):
    r = client.get("/api/speeches/svc-00/factors", params={"start": 9.0, "end": 2.0})
    assert r.status_code == 400
    assert json.loads(r.content)["error"]["code"] == "RangeError"


def test_slices_contract(client, corpus_dir):
    doc = get_json(client, "/api/speeches/svc-01/slices")
    assert len(doc["slices"]) == 8
    starts = [s["start_s"] for s in doc["slices"]]
    widths = np.diff(starts + [doc["slices"][-1]["end_s"]])
    assert np.allclose(widths, widths[0])

    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    entry = snap.speech("svc-01")
    scores = sentence_scores_for(entry, builtin_model(), None)
    expected = slices_to_doc(time_slices(snap.bundle("svc-01").view(), sentence_scores=scores))
    r = client.get("/api/speeches/svc-01/slices")
    assert r.content == canonical_json({"schema_version": 1, "speech_id": "svc-01", **expected})


def test_slices_sentence_scores_respect_selection(client, corpus_dir):
    doc = get_json(client, "/api/speeches/svc-01/slices",
                   params={"factors": "face.valence.average"})
    store = CorpusStore(corpus_dir)
    entry = store.snapshot().speech("svc-01")
    model = builtin_model()
    for s in doc["sentences"]:
        fv = next(x.factors for x in entry.sentences if x.index == s["index"])
        expected = aggregate_score(model, fv, [FactorId.VALENCE_AVERAGE])
        assert s["effectiveness"] == pytest.approx(expected)


def test_twin_deterministic_and_equals_inprocess(client, corpus_dir):
    a = client.get("/api/speeches/svc-02/twin")
    b = client.get("/api/speeches/svc-02/twin")
    assert a.content == b.content

    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    twin = speech_twin(snap.bundle("svc-02").view(), pose_seed=pose_seed_for("svc-02"))
    doc = json.loads(a.content)
    assert canonical_json(doc["twin"]) == canonical_json(twin_to_doc(twin))
    weights = [g["weight"] for g in doc["twin"]["representative_gestures"]]
    assert sum(weights) == pytest.approx(1.0, abs=1e-9)


def test_twin_factor_values(client, corpus_dir):
    doc = get_json(client, "/api/speeches/svc-02/twin",
                   params={"factors": "face.valence.average,voice.volume.average"})
    store = CorpusStore(corpus_dir)
    entry = store.snapshot().speech("svc-02")
    assert doc["factor_values"]["face.valence.average"] == entry.factors.value(FactorId.VALENCE_AVERAGE)


def test_recommend_endpoint_equals_inprocess(client, corpus_dir):
    body = {
        "speech_id": "svc-00",
        "mode": "factor",
        "selected_factors": ["face.valence.average", "voice.volume.average"],
        "k": 2,
    }
    r = client.post("/api/recommend", json=body)
    assert r.status_code == 200
    doc = json.loads(r.content)

    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    result = recommend(RecommendationQuery(
        speech_id="svc-00", mode="factor",
        selected_factors=(FactorId.VALENCE_AVERAGE, FactorId.VOLUME_AVERAGE), k=2), snap)
    expected = result_to_doc(result)
    import copy

    got_bare = copy.deepcopy(doc)
    got_bare.pop("schema_version")
    for cand in got_bare["candidates"]:
        cand.pop("twin")
        cand.pop("level")
        cand.pop("title")
    assert canonical_json(got_bare) == canonical_json(expected)
    assert all("twin" in c for c in doc["candidates"])


def test_recommend_two_speech_corpus(tmp_path):
    store = CorpusStore(tmp_path / "two")
    store.ingest(synth_bundle(700, PROFILE, speech_id="one"))
    store.ingest(synth_bundle(701, PROFILE, speech_id="two"))
    client = TestClient(create_app(store, builtin_model()))
    r = client.post("/api/recommend", json={"speech_id": "one", "mode": "script", "k": 1})
    doc = json.loads(r.content)
    assert [c["speech_id"] for c in doc["candidates"]] == ["two"]


def test_recommend_undefined_factor_400(tmp_path):
    store = CorpusStore(tmp_path / "nf")
    store.ingest(synth_bundle(710, SynthProfile(duration_s=10.0, fps=4.0, sentence_count=0),
                              speech_id="one"))
    store.ingest(synth_bundle(711, PROFILE, speech_id="two"))
    client = TestClient(create_app(store, builtin_model()))
    r = client.post("/api/recommend", json={
        "speech_id": "one", "mode": "factor", "selected_factors": ["pace.rate.average"], "k": 1})
    assert r.status_code == 400
    assert json.loads(r.content)["error"]["code"] == "UndefinedFactor"


def test_recommend_bad_body(client):
    r = client.post("/api/recommend", content=b"{broken")
    assert r.status_code == 400
    assert json.loads(r.content)["error"]["code"] == "SchemaError"


def test_overlay_endpoint(client, corpus_dir):
    r = client.get("/api/speeches/svc-03/overlay", params={"t": 6.0, "interval": 0.5})
    doc = json.loads(r.content)
    ops = [s["opacity"] for s in doc["samples"]]
    assert ops == sorted(ops)
    store = CorpusStore(corpus_dir)
    trail = overlay_trail(store.snapshot().bundle("svc-03"), 6.0, n=10, interval_s=0.5)
    assert r.content == canonical_json(
        {"schema_version": 1, "speech_id": "svc-03", **overlay_to_doc(trail)})


def test_model_roundtrips_reference_file(client):
    doc = get_json(client, "/api/model")
    assert doc["model"] == model_to_doc(builtin_model())


def test_encodings_endpoint(client):
    doc = get_json(client, "/api/encodings")
    assert doc["glyph"] == encodings_doc()["glyph"]


def test_ingest_endpoint_roundtrip(tmp_path):
    store = CorpusStore(tmp_path / "ing")
    client = TestClient(create_app(store, builtin_model()))
    bundle = synth_bundle(720, PROFILE, speech_id="posted")
    r = client.post("/api/ingest", json=bundle_to_doc(bundle))
    assert r.status_code == 200
    assert json.loads(r.content)["speech_id"] == "posted"
    ids = [m["speech_id"] for m in get_json(client, "/api/speeches")["speeches"]]
    assert ids == ["posted"]
    r2 = client.post("/api/ingest", json=bundle_to_doc(bundle))
    assert r2.status_code == 409
    bad = bundle_to_doc(bundle)
    bad["frames"]["valence"][0] = 3.0
    r3 = client.post("/api/ingest", json=bad)
    assert r3.status_code == 400
    assert json.loads(r3.content)["error"]["code"] == "InvariantError"


def test_byte_stability_across_clients(corpus_dir):
    store = CorpusStore(corpus_dir)
    c1 = TestClient(create_app(store, builtin_model()))
    c2 = TestClient(create_app(CorpusStore(corpus_dir), builtin_model()))
    for url in ("/api/speeches", "/api/speeches/svc-00/factors",
                "/api/speeches/svc-00/slices", "/api/speeches/svc-00/twin"):
        assert c1.get(url).content == c2.get(url).content


def test_factor_board_endpoint(client, corpus_dir):
    doc = get_json(client, "/api/factors/face.valence.average/board",
                   params={"speech_id": "svc-00"})
    store = CorpusStore(corpus_dir)
    snap = store.snapshot()
    entry = snap.speech("svc-00")
    assert doc["value"] == entry.factors.value(FactorId.VALENCE_AVERAGE)
    assert doc["histogram"] is not None
    assert sum(doc["histogram"]["counts"]) == 4  # every corpus speech defined
    assert doc["curve"] is not None and len(doc["curve"]) == 41
    xs = [p[0] for p in doc["curve"]]
    assert xs == sorted(xs)
    vals = [e.factors.value(FactorId.VALENCE_AVERAGE) for e in snap.speeches()]
    assert doc["corpus_mean"] == pytest.approx(np.mean(vals))
    best = max(e.meta.level for e in snap.speeches())
    best_vals = [e.factors.value(FactorId.VALENCE_AVERAGE)
                 for e in snap.speeches() if e.meta.level == best]
    assert doc["best_mean"] == pytest.approx(np.mean(best_vals))
    assert doc["best_level"] == best


def test_factor_board_unknown_factor(client):
    r = client.get("/api/factors/not.a.factor/board", params={"speech_id": "svc-00"})
    assert r.status_code == 400
    assert json.loads(r.content)["error"]["code"] == "SchemaError"


def test_overlay_includes_bbox(client):
    doc = get_json(client, "/api/speeches/svc-03/overlay", params={"t": 6.0})
    assert all("bbox_center" in s for s in doc["samples"])
    assert any(s["bbox_center"] is not None for s in doc["samples"])
