"""Operator command line: ingest, analyze, fit, recommend, synth, serve.

Every error exits nonzero and prints the machine code from the shared error
taxonomy; reports group the 23 factors under their six technique headings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bundle import FeatureBundle, load_bundle
from .effectiveness import (
    EffectivenessModel,
    builtin_model,
    fit,
    load_model,
    save_model,
)
from .errors import PodiumError, SchemaError
from .factors import ALL_FACTORS, FactorId, Technique, compute_factors
from .recommend import RecommendationQuery, recommend
from .bundle import slice_bundle
from .service import factors_payload
from .store import CorpusStore
from .synth import SynthProfile, synth_bundle

PROFILES = {
    "default": SynthProfile,
    "constant": SynthProfile.constant,
}


def _parse_span(raw: str | None) -> tuple[float, float] | None:
    if raw is None:
        return None
    try:
        lo, hi = raw.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise SchemaError("--span", "expected START:END seconds") from None


def _load_model_arg(path: str | None) -> EffectivenessModel:
    return builtin_model() if path is None else load_model(path)


def _bundle_from_arg(target: str, store: CorpusStore | None) -> FeatureBundle:
    p = Path(target)
    if p.exists():
        return load_bundle(p.read_bytes())
    if store is None:
        raise SchemaError("target", f"{target!r} is not a file and no --corpus was given")
    return store.get_bundle(target)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    store = CorpusStore(args.corpus)
    bundle = load_bundle(Path(args.path).read_bytes())
    speech_id = store.ingest(bundle, force=args.force)
    print(speech_id)
    return 0


def cmd_analyze(args) -> int:
    store = CorpusStore(args.corpus) if args.corpus else None
    bundle = _bundle_from_arg(args.target, store)
    span = _parse_span(args.span)
    if span is None:
        fv = compute_factors(bundle)
    else:
        fv = compute_factors(slice_bundle(bundle, *span))
    model = _load_model_arg(args.model)
    payload = factors_payload(bundle.meta.speech_id, fv, model, span)

    if args.format == "json":
        print(json.dumps(payload, indent=1))
        return 0

    print(f"# Factor report: {bundle.meta.speech_id}")
    print(f"speech: {bundle.meta.title} | level {bundle.meta.level} | {bundle.meta.duration_s:.1f}s")
    if span is not None:
        print(f"span: {span[0]:.2f}s to {span[1]:.2f}s")
    print()
    print(f"| {'factor':34s} | {'value':>12s} | {'cover':>5s} | {'effectiveness':>13s} |")
    print(f"|{'-'*36}|{'-'*14}|{'-'*7}|{'-'*15}|")
    for technique in Technique:
        rows = [f for f in ALL_FACTORS if f.technique is technique]
        print(f"| **{technique.value}**{' ' * (31 - len(technique.value))} |              |       |               |")
        for f in rows:
            entry = payload["factors"][f.id]
            value = "undefined" if entry["value"] is None else f"{entry['value']:.6g}"
            score = entry["score"]
            label = "-" if score is None else score["label"]
            print(f"| {f.id:34s} | {value:>12s} | {entry['coverage']:5.2f} | {label:>13s} |")
    return 0


def cmd_fit(args) -> int:
    store = CorpusStore(args.corpus)
    snap = store.snapshot()
    corpus = [(e.factors, e.meta.level) for e in snap.speeches()]
    model = fit(corpus, min_speeches=args.min_speeches)
    save_model(model, args.out)
    print(f"# Effectiveness fit over {len(corpus)} speeches -> {args.out}")
    print(f"| {'factor':34s} | {'w':>12s} | {'p':>7s} | sig |")
    print(f"|{'-'*36}|{'-'*14}|{'-'*9}|-----|")
    for technique in Technique:
        for f in (f for f in ALL_FACTORS if f.technique is technique):
            c = model.coefficients.get(f)
            if c is None:
                print(f"| {f.id:34s} | {'unfitted':>12s} | {'-':>7s} |  -  |")
            else:
                star = " * " if c.significant else "   "
                print(f"| {f.id:34s} | {c.w:12.5g} | {c.p_value:7.3f} | {star} |")
    return 0


def cmd_recommend(args) -> int:
    store = CorpusStore(args.corpus)
    snap = store.snapshot()
    selected = tuple(FactorId.from_id(tok) for tok in args.factors.split(",")) if args.factors else ()
    span = _parse_span(args.span)
    query = RecommendationQuery(
        speech_id=args.speech_id,
        start_s=None if span is None else span[0],
        end_s=None if span is None else span[1],
        granularity=args.granularity,
        mode=args.mode,
        selected_factors=selected,
        k=args.k,
        direction=args.direction,
        include_self=args.include_self,
    )
    result = recommend(query, snap)
    print(f"# {args.direction} {args.granularity} candidates for {args.speech_id} ({args.mode} mode)")
    print(f"| {'rank':>4s} | {'candidate':40s} | {'distance':>10s} |")
    print(f"|{'-'*6}|{'-'*42}|{'-'*12}|")
    for rank, c in enumerate(result.candidates, start=1):
        name = c.speech_id if c.sentence_index is None else f"{c.speech_id}#s{c.sentence_index}"
        print(f"| {rank:4d} | {name:40s} | {c.distance:10.6f} |")
    if result.skipped:
        print(f"({result.skipped} candidates skipped for undefined factors)")
    return 0


def cmd_synth(args) -> int:
    store = CorpusStore(args.corpus)
    profile_factory = PROFILES[args.profile]
    import numpy as np

    for i in range(args.n):
        seed = args.seed + i
        profile = profile_factory()
        if args.jitter:
            profile = profile.jittered(np.random.default_rng(seed * 7919 + 13))
        level = 1 + (i % 6)
        from dataclasses import replace

        profile = replace(profile, level=level)
        bundle = synth_bundle(seed, profile, speech_id=f"{args.prefix}-{seed:05d}")
        store.ingest(bundle, force=args.force)
        print(bundle.meta.speech_id)
    return 0


def cmd_serve(args) -> int:
    from .service import run

    store = CorpusStore(args.corpus)
    model = _load_model_arg(args.model)
    run(store, model, host=args.host, port=args.port, ui_dir=args.ui_dir)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="podium",
        description="Presentation-technique analytics over multimodal speech feature bundles.",
    )
    parser.add_argument("--version", action="version", version=f"podium {__version__}")
    parser.add_argument("--config", help="JSON file whose keys preload any flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a bundle file and add it to a corpus")
    p.add_argument("path")
    p.add_argument("--corpus", required=True)
    p.add_argument("--force", action="store_true", help="replace an existing speech id")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="factor report for a speech id or bundle file")
    p.add_argument("target", help="speech id (with --corpus) or bundle path")
    p.add_argument("--corpus")
    p.add_argument("--span", help="START:END seconds")
    p.add_argument("--model", help="model file (default: built-in reference coefficients)")
    p.add_argument("--format", choices=("md", "json"), default="md")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit an effectiveness model from an ingested corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-speeches", type=int, default=30)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("recommend", help="most similar / different speeches or sentences")
    p.add_argument("speech_id")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=("factor", "script"), default="factor")
    p.add_argument("--granularity", choices=("speech", "sentence"), default="speech")
    p.add_argument("--factors", help="comma-separated factor ids (factor mode)")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--direction", choices=("most-similar", "most-different"), default="most-similar")
    p.add_argument("--span", help="START:END seconds")
    p.add_argument("--include-self", action="store_true")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("synth", help="generate and ingest a synthetic corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--profile", choices=sorted(PROFILES), default="default")
    p.add_argument("--prefix", default="synth")
    p.add_argument("--jitter", action=argparse.BooleanOptionalAction, default=True,
                   help="vary channel baselines per speech")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", help="serve a built web UI from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    # --config FILE preloads defaults for every subparser flag of the same name
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        parser.error("--config needs a file path")
    try:
        overrides = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        parser.error(f"bad config file: {e}")
    rest = argv[:i] + argv[i + 2:]
    extra: list[str] = []
    for key, value in overrides.items():
        flag = f"--{key.replace('_', '-')}"
        if flag.lstrip("-") in [a.lstrip("-") for a in rest]:
            continue
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        else:
            extra.extend([flag, str(value)])
    return rest + extra


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PodiumError as e:
        print(f"error {e.code}: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as e:
        print(f"error StorageError: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
