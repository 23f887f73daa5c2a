#!/usr/bin/env python3
"""Build a synthetic demo corpus, fit an effectiveness model on it, and print
a short tour: factor report, nearest neighbours, twin summary.

Usage: python scripts/build_demo_corpus.py [--root demo-corpus] [--n 24] [--seed 7]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from podium.effectiveness import fit, save_model
from podium.factors import FactorId
from podium.recommend import RecommendationQuery, recommend
from podium.store import CorpusStore
from podium.summarize import speech_twin
from podium.synth import SynthProfile, synth_bundle


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default="demo-corpus")
    ap.add_argument("--n", type=int, default=24)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    store = CorpusStore(args.root)
    print(f"building {args.n} speeches under {args.root}/ ...")
    for i in range(args.n):
        seed = args.seed + i
        profile = SynthProfile(level=1 + i % 6).jittered(np.random.default_rng(seed * 31 + 1))
        bundle = synth_bundle(seed, profile, speech_id=f"demo-{seed:04d}")
        try:
            store.ingest(bundle)
        except Exception as e:
            print(f"  skip {bundle.meta.speech_id}: {e}")

    snap = store.snapshot()
    corpus = [(e.factors, e.meta.level) for e in snap.speeches()]
    model = fit(corpus, min_speeches=len(corpus))
    model_path = Path(args.root) / "fitted-model.json"
    save_model(model, model_path)
    print(f"fitted model -> {model_path}")
    sig = [f.id for f in model.significant_factors()]
    print(f"significant factors on this corpus: {sig or 'none (random synthetic data)'}")

    query = snap.ids()[0]
    q = RecommendationQuery(query, mode="factor",
                            selected_factors=(FactorId.VALENCE_AVERAGE,
                                              FactorId.VOLUME_VOLATILITY), k=3)
    print(f"\nclosest to {query} by valence average + volume volatility:")
    for c in recommend(q, snap).candidates:
        print(f"  {c.speech_id}  d={c.distance:.4f}")

    twin = speech_twin(snap.bundle(query).view(), pose_seed=1)
    print(f"\ntwin of {query}: valence {twin.valence_mean:+.2f}, arousal {twin.arousal_mean:+.2f}, "
          f"volume {twin.volume_mean:.1f} dB, {len(twin.representative_gestures)} gestures, "
          f"{len(twin.footprints)} footprints")
    print(json.dumps({"emotion_proportions": [round(p, 3) for p in twin.emotion_proportions]}))


if __name__ == "__main__":
    main()
