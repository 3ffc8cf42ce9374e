"""Command-line entry point.

One subcommand per workflow step: ingest map data and media manifests,
generate synthetic corpora, train/evaluate, run the learning-curve and
cross-user studies, serve HTTP, and build a self-contained demo data
directory. Every subcommand accepts --config pointing at a JSON file
whose keys mirror the flags; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import base64
import dataclasses
import json
import os
import sys
from pathlib import Path

from .context import FRAMES, GEOMAGNETIC
from .engine import RetrievalEngine
from .learning import TrainConfig, fork_params, run_feedback_rounds
from .lexicon import default_lexicon
from .metrics import (
    cross_user_matrix,
    curve_csv,
    exact_match_accuracy,
    format_matrix,
    learning_curve,
    run_pairs,
    score_against_gold,
)
from .parsing import ParamVector, Parser
from .synth import (
    GenConfig,
    TEMPLATES,
    generate_dataset,
    load_corpus,
    random_world,
    save_corpus,
    scripted_annotator,
)
from .world import UserContext, WorldStore

DEFAULT_CENTER = (49.2556, 7.0452)

# 1x1 transparent png, used as the demo media payload
_PNG_BYTES = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJ"
    "AAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg=="
)


def _latlon(value) -> tuple[float, float]:
    if isinstance(value, (list, tuple)):
        lat, lon = value
        return (float(lat), float(lon))
    lat, lon = value.split(",")
    return (float(lat), float(lon))


def _int_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in value.split(",") if v.strip()]


def _str_list(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _users_spec(value):
    if isinstance(value, str):
        value = json.loads(value)
    return value


def _gen_config(args, here: tuple[float, float]) -> GenConfig:
    return GenConfig(
        n=args.n,
        seed=args.seed,
        fixed_here=here,
        frame=args.frame,
        query_time=args.query_time,
        user_id=args.user_id,
        heading_deg=args.heading,
        templates=_str_list(args.templates),
    )


def _snapshot(store: WorldStore, here: tuple[float, float]):
    probe_ctx = UserContext(
        user_id="cli", lat=here[0], lon=here[1], heading_deg=0.0, query_time=20000101
    )
    return store.snapshot_with(probe_ctx)


def _parser_for(snap) -> Parser:
    return Parser(default_lexicon().with_entities(snap.entity_names()))


# -- commands -------------------------------------------------------------------


def cmd_ingest_osm(args) -> int:
    store = WorldStore()
    store.load(args.data_dir)
    report = store.ingest_osm_xml(args.file)
    store.save(args.data_dir)
    print(
        f"facts added: {report.facts_added}  skipped: {report.nodes_skipped}"
        f"  duplicates: {report.duplicates}"
    )
    print(f"world now holds {store.fact_count} facts")
    return 0


def cmd_ingest_media(args) -> int:
    store = WorldStore()
    store.load(args.data_dir)
    with open(args.manifest, encoding="utf-8") as fh:
        report = store.ingest_media_manifest(fh)
    store.save(args.data_dir)
    print(f"media added: {report.added}  invalid lines: {len(report.invalid)}")
    for lineno, reason in report.invalid:
        print(f"  line {lineno}: {reason}", file=sys.stderr)
    return 0


def cmd_gen_synth(args) -> int:
    store = WorldStore()
    store.load(args.data_dir)
    here = _latlon(args.here)
    snap = _snapshot(store, here)
    pairs = generate_dataset(snap, _gen_config(args, here))
    save_corpus(pairs, args.out)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return 0


def cmd_train(args) -> int:
    pairs = load_corpus(args.corpus)
    engine = RetrievalEngine.from_data_dir(args.data_dir)
    config = TrainConfig(
        seed=args.seed, epochs=args.epochs, eta=args.eta, l2=args.l2, frame=args.frame
    )
    report = engine.train_shared(pairs, config)
    engine.save(args.data_dir)
    print(f"trained on {len(pairs) - report.skipped_pairs}/{len(pairs)} pairs")
    print(f"initial objective: {report.initial_objective:.4f}")
    for i, epoch in enumerate(report.epochs, start=1):
        print(
            f"epoch {i:2d}: objective {epoch.objective:.4f}"
            f"  eta {epoch.eta:.5f}  halvings {epoch.halvings}"
        )
    print(f"shared parameters at version {engine.params.shared.version}")
    return 0


def cmd_eval(args) -> int:
    pairs = load_corpus(args.corpus)
    engine = RetrievalEngine.from_data_dir(args.data_dir)
    params = engine.params.for_user(args.user) if args.user else engine.params.shared
    snap = engine.store.snapshot_with(pairs[0].context)
    parser = _parser_for(snap)
    predictions = run_pairs(pairs, snap, params, parser, frame=args.frame)
    report = score_against_gold(pairs, predictions, with_standard_recall=args.standard_recall)
    print(f"queries:   {report.n_queries}")
    print(f"retrieved: {report.retrieved}")
    print(f"relevant:  {report.relevant}")
    print(f"accuracy:  {report.accuracy:.2f}%")
    print(f"precision: {report.precision:.2f}%")
    print(f"recall:    {report.recall:.2f}%  (per-query denominator)")
    if report.standard_recall is not None:
        print(f"standard recall: {report.standard_recall:.2f}%")
    print(f"f1:        {report.f1:.2f}")
    if args.json:
        print(report.as_json())
    return 0


def cmd_curve(args) -> int:
    store = WorldStore()
    store.load(args.data_dir)
    here = _latlon(args.here)
    snap = _snapshot(store, here)
    parser = _parser_for(snap)
    gen = _gen_config(args, here)
    eval_pairs = generate_dataset(
        snap, dataclasses.replace(gen, n=args.eval_n, seed=args.seed + 1)
    )
    train_config = TrainConfig(
        seed=args.seed, epochs=args.epochs, eta=args.eta, l2=args.l2, frame=args.frame
    )
    points = learning_curve(
        snap, gen, _int_list(args.sizes), eval_pairs, train_config, parser
    )
    csv = curve_csv(points)
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(csv, end="")
    return 0


def cmd_crossuser(args) -> int:
    store = WorldStore()
    store.load(args.data_dir)
    here = _latlon(args.here)
    snap = _snapshot(store, here)
    parser = _parser_for(snap)
    # Personalization explores from a fresh base by default: feedback
    # steps scale with the argmax's residual doubt, so a converged
    # shared model leaves them too small to reverse a convention
    # within a short session.
    if args.from_shared:
        engine = RetrievalEngine.from_data_dir(args.data_dir)
        shared = engine.params.shared
    else:
        shared = ParamVector()

    users = _users_spec(args.users)
    if len(users) < 2:
        print("need at least two users", file=sys.stderr)
        return 2

    models = {}
    annotators = {}
    for i, spec in enumerate(users):
        user_id = spec["user_id"]
        heading = float(spec.get("heading_deg", 0.0))
        annotators[user_id] = scripted_annotator(spec["convention"], heading)
        feedback_pairs = generate_dataset(
            snap,
            GenConfig(
                n=args.rounds,
                seed=args.seed + i,
                fixed_here=here,
                templates=("spatial",),
                heading_deg=heading,
                user_id=user_id,
            ),
        )
        models[user_id] = run_feedback_rounds(
            user_id,
            annotators[user_id],
            [(p.query_text, p.context) for p in feedback_pairs],
            snap,
            fork_params(user_id, shared),
            parser,
            eta=args.eta,
        )

    probe_pairs = generate_dataset(
        snap,
        GenConfig(
            n=args.probe_n,
            seed=args.seed + 997,
            fixed_here=here,
            templates=("spatial",),
            user_id="probe",
        ),
    )
    probes = [(p.query_text, p.context) for p in probe_pairs]
    matrix = cross_user_matrix(models, annotators, probes, snap, parser)
    print(format_matrix(matrix))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    engine = RetrievalEngine.from_data_dir(args.data_dir)
    print(
        f"serving {engine.store.fact_count} facts / {engine.store.media_count} media"
        f" from {args.data_dir} on {args.host}:{args.port}"
    )
    uvicorn.run(create_app(engine), host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_demo(args) -> int:
    """Build a ready-to-serve data directory: world, media files, trained model."""
    data_dir = Path(args.data_dir)
    store = random_world(args.seed, n_facts=args.n_facts, n_media=args.n_media)
    store.save(data_dir)

    snap = _snapshot(store, DEFAULT_CENTER)
    for record in snap.media:
        path = data_dir / record.uri
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(_PNG_BYTES if record.kind == "image" else b"\x00demo-video")

    gen = GenConfig(n=args.train_n, seed=args.seed, fixed_here=DEFAULT_CENTER)
    pairs = generate_dataset(snap, gen)
    corpus_path = data_dir / "corpus.jsonl"
    save_corpus(pairs, corpus_path)

    engine = RetrievalEngine(store=store, media_root=data_dir)
    config = TrainConfig(seed=args.seed, epochs=args.epochs, eta=args.eta, l2=args.l2)
    report = engine.train_shared(pairs, config)
    engine.save(data_dir)

    eval_pairs = generate_dataset(snap, dataclasses.replace(gen, n=50, seed=args.seed + 1))
    parser = _parser_for(snap)
    accuracy = exact_match_accuracy(eval_pairs, snap, engine.params.shared, parser)
    print(f"demo data dir: {data_dir}")
    print(f"facts: {store.fact_count}  media: {store.media_count}  corpus: {len(pairs)}")
    print(
        f"objective {report.initial_objective:.4f} -> {report.epochs[-1].objective:.4f}"
        f" over {len(report.epochs)} epochs"
    )
    print(f"held-out exact-match accuracy: {accuracy:.1f}%")
    print(f"next: geomedia serve --data-dir {data_dir}")
    return 0


# -- wiring ----------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--data-dir",
        default=os.environ.get("GEOMEDIA_DATA_DIR", "geomedia_data"),
        help="state directory (env GEOMEDIA_DATA_DIR)",
    )
    sub.add_argument("--config", help="JSON file of defaults for this subcommand")


def _add_gen_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=200)
    sub.add_argument("--seed", type=int, default=7)
    sub.add_argument("--frame", choices=sorted(FRAMES), default=GEOMAGNETIC)
    sub.add_argument("--here", default=f"{DEFAULT_CENTER[0]},{DEFAULT_CENTER[1]}")
    sub.add_argument("--query-time", type=int, default=None, dest="query_time")
    sub.add_argument("--heading", type=float, default=None)
    sub.add_argument("--user-id", default="synth", dest="user_id")
    sub.add_argument("--templates", default=",".join(TEMPLATES))


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--epochs", type=int, default=10)
    sub.add_argument("--eta", type=float, default=0.1)
    sub.add_argument("--l2", type=float, default=1e-4)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="geomedia",
        description="contextual media retrieval over geo/time-tagged collections",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, argparse.ArgumentParser] = {}

    def sub(name: str, func, help_text: str) -> argparse.ArgumentParser:
        s = commands.add_parser(name, help=help_text)
        s.set_defaults(func=func)
        _add_common(s)
        subs[name] = s
        return s

    s = sub("ingest-osm", cmd_ingest_osm, "add facts from an OSM XML file")
    s.add_argument("file")

    s = sub("ingest-media", cmd_ingest_media, "add media from a JSONL manifest")
    s.add_argument("manifest")

    s = sub("gen-synth", cmd_gen_synth, "generate a synthetic training corpus")
    _add_gen_flags(s)
    s.add_argument("--out", default="corpus.jsonl")

    s = sub("train", cmd_train, "train the shared parameters on a corpus")
    s.add_argument("corpus")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--frame", choices=sorted(FRAMES), default=GEOMAGNETIC)
    _add_train_flags(s)

    s = sub("eval", cmd_eval, "score a corpus against the stored parameters")
    s.add_argument("corpus")
    s.add_argument("--frame", choices=sorted(FRAMES), default=GEOMAGNETIC)
    s.add_argument("--user", default=None, help="evaluate this user's fork")
    s.add_argument("--standard-recall", action="store_true", dest="standard_recall")
    s.add_argument("--json", action="store_true")

    s = sub("curve", cmd_curve, "learning curve over training-set sizes")
    _add_gen_flags(s)
    _add_train_flags(s)
    s.add_argument("--sizes", default="0,50,100,200")
    s.add_argument("--eval-n", type=int, default=100, dest="eval_n")
    s.add_argument("--out", default=None)

    s = sub("crossuser", cmd_crossuser, "cross-user feedback simulation matrix")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--here", default=f"{DEFAULT_CENTER[0]},{DEFAULT_CENTER[1]}")
    s.add_argument("--rounds", type=int, default=100)
    s.add_argument("--probe-n", type=int, default=60, dest="probe_n")
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument(
        "--from-shared",
        action="store_true",
        dest="from_shared",
        help="fork user models from the stored shared parameters",
    )
    s.add_argument(
        "--users",
        default=json.dumps(
            [
                {"user_id": "magnetic", "convention": "geomagnetic"},
                {"user_id": "egocentric", "convention": "user_centric", "heading_deg": 90},
            ]
        ),
    )

    s = sub("serve", cmd_serve, "run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)

    s = sub("demo", cmd_demo, "build a seeded, trained, servable data directory")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--n-facts", type=int, default=25, dest="n_facts")
    s.add_argument("--n-media", type=int, default=240, dest="n_media")
    s.add_argument("--train-n", type=int, default=200, dest="train_n")
    _add_train_flags(s)

    return parser, subs


def main(argv=None) -> int:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        sub = subs[args.command]
        known = {action.dest for action in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            parser.error(f"unknown config keys for {args.command}: {sorted(unknown)}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
