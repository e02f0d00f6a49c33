"""Command-line entry points: full pipeline runs, single stages, serving."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline as pl
from .corpus import IngestError
from .demo import generate_demo
from .filters import filter_from_params
from .sets import export_set
from .service import serve
from .store import ArtifactStore, StoreError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STAGE = 3


def _load_config(args) -> pl.PipelineConfig:
    obj = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise IngestError(f"config file not found: {path}")
        obj = json.loads(path.read_text(encoding="utf-8"))
    overrides = {
        "train_file": getattr(args, "train_file", None),
        "log_file": getattr(args, "log_file", None),
        "embedding_file": getattr(args, "embedding_file", None),
        "coords_file": getattr(args, "coords_file", None),
        "seed": getattr(args, "seed", None),
        "rule_pack_dir": getattr(args, "rule_pack_dir", None),
    }
    for key, value in overrides.items():
        if value is not None:
            obj[key] = value
    if getattr(args, "language_pair", None):
        obj["language_pair"] = args.language_pair.split("-")
    if getattr(args, "grid_density", None):
        obj.setdefault("kde", {})["grid_density"] = args.grid_density
    return pl.PipelineConfig.from_dict(obj)


def _print_summary(rows: list[dict], as_json: bool):
    if as_json:
        print(json.dumps({"sets": rows}, ensure_ascii=False, sort_keys=True))
        return
    header = f"{'set':<40} {'logs':>7} {'train':>7} {'chrF':>6} {'FA':>9} {'ratio':>6}"
    print(header)
    print("-" * len(header))
    for row in rows:
        chrf = f"{row['mean_chrf']:.3f}" if row["mean_chrf"] is not None else "-"
        fa = f"{row['mean_familiarity']:.3f}" if row["mean_familiarity"] is not None else "-"
        ratio = f"{row['train_ratio']:.2f}" if row["train_ratio"] is not None else "-"
        print(f"{row['name']:<40} {row['log_count']:>7} {row['train_count']:>7} "
              f"{chrf:>6} {fa:>9} {ratio:>6}")


def _add_config_flags(sub):
    sub.add_argument("--config", help="pipeline config JSON")
    sub.add_argument("--train-file")
    sub.add_argument("--log-file")
    sub.add_argument("--embedding-file")
    sub.add_argument("--coords-file")
    sub.add_argument("--language-pair", help="e.g. en-es")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--grid-density", type=int)
    sub.add_argument("--rule-pack-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtriage",
                                     description="Mine and serve MT challenge sets")
    subs = parser.add_subparsers(dest="command", required=True)

    demo = subs.add_parser("demo", help="generate a synthetic demo corpus")
    demo.add_argument("--out", required=True)
    demo.add_argument("--train", type=int, default=5000)
    demo.add_argument("--log", type=int, default=5000)
    demo.add_argument("--dim", type=int, default=32)
    demo.add_argument("--seed", type=int, default=7)
    demo.add_argument("--jsonl-embeddings", action="store_true")

    run = subs.add_parser("run", help="run the full pipeline into a fresh store")
    _add_config_flags(run)
    run.add_argument("--store", required=True)
    run.add_argument("--json", action="store_true", dest="as_json")

    for stage in pl.STAGES:
        sub = subs.add_parser(stage, help=f"run only the {stage} stage")
        _add_config_flags(sub)
        sub.add_argument("--store", required=True)

    srv = subs.add_parser("serve", help="serve a completed store over HTTP")
    srv.add_argument("--store", required=True)
    srv.add_argument("--bind", default="127.0.0.1:8000")

    exp = subs.add_parser("export", help="export one set as JSONL")
    exp.add_argument("--store", required=True)
    exp.add_argument("--set-id", required=True)
    exp.add_argument("--out", required=True)
    for flag in ("time-from", "time-to", "keywords", "kw-mode", "chrf-min", "chrf-max",
                 "fa-min", "fa-max", "provenance", "q", "overlap-set"):
        exp.add_argument(f"--{flag}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except pl.PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (IngestError, StoreError, FileNotFoundError, FileExistsError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _dispatch(args) -> int:
    if args.command == "demo":
        paths = generate_demo(args.out, n_train=args.train, n_log=args.log,
                              dim=args.dim, seed=args.seed,
                              binary_embeddings=not args.jsonl_embeddings)
        print(f"demo corpus written under {args.out}; config: {paths.config_file}")
        return EXIT_OK

    if args.command == "run":
        config = _load_config(args)
        store = pl.run_pipeline(config, args.store)
        _print_summary(pl.summarize(store), args.as_json)
        return EXIT_OK

    if args.command in pl.STAGES:
        config = _load_config(args)
        store = ArtifactStore(args.store)
        with pl.StoreLock(store.root):
            pl.run_stage(args.command, config, store)
        print(f"stage {args.command} done")
        return EXIT_OK

    if args.command == "serve":
        store = ArtifactStore(args.store)
        serve(store, args.bind)
        return EXIT_OK

    if args.command == "export":
        store = ArtifactStore(args.store)
        store.validate()
        corpus = store.load_corpus()
        all_sets = store.load_sets()
        by_id = {s.set_id: s for s in all_sets}
        if args.set_id not in by_id:
            raise StoreError(f"unknown set {args.set_id!r}")
        params = {
            "time_from": args.time_from, "time_to": args.time_to,
            "keywords": args.keywords, "kw_mode": args.kw_mode,
            "chrf_min": args.chrf_min, "chrf_max": args.chrf_max,
            "fa_min": args.fa_min, "fa_max": args.fa_max,
            "provenance": args.provenance, "q": args.q,
            "overlap_set": args.overlap_set,
        }
        filt = filter_from_params({k: v for k, v in params.items() if v is not None})
        overlap = None
        if filt.overlap_set:
            other = by_id.get(filt.overlap_set)
            if other is None:
                raise StoreError(f"unknown overlap set {filt.overlap_set!r}")
            overlap = set(other.effective_members())
        count = export_set(by_id[args.set_id], corpus, filt, args.out, overlap)
        print(f"wrote {count} rows to {args.out}")
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
