"""Command-line entry point wrapping the pipeline stages and the server."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .pipeline import (MissingStageError, PipelineConfig, cmd_ensemble,
                       cmd_evaluate, cmd_phantom, cmd_predict, cmd_preprocess,
                       cmd_reconstruct, cmd_report, cmd_split, cmd_train,
                       desk_profile, load_config, paper_profile, save_config)
from .volume import Plane

COMMANDS = ("phantom", "preprocess", "split", "train", "predict",
            "reconstruct", "ensemble", "evaluate", "report", "serve",
            "init-config")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probseg",
        description="Tumor probability-map segmentation pipeline")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="pipeline config JSON file")
    parser.add_argument("--data-root", default="./probseg_data",
                        help="artifact directory when no --config is given")
    parser.add_argument("--profile", choices=("desk", "paper"), default="desk")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--plane", default="all",
                        choices=("axial", "coronal", "sagittal", "all"))
    parser.add_argument("--port", type=int, default=8000, help="serve only")
    parser.add_argument("--host", default="127.0.0.1", help="serve only")
    parser.add_argument("--quiet", action="store_true")
    return parser


def _resolve_config(args) -> PipelineConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        build = desk_profile if args.profile == "desk" else paper_profile
        cfg = build(args.data_root, seed=args.seed or 0)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed,
                      selection=replace(cfg.selection, rng_seed=args.seed),
                      model=replace(cfg.model, seed=args.seed))
    if args.plane != "all":
        cfg = replace(cfg, planes=(Plane.parse(args.plane),))
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    echo = None if args.quiet else print
    try:
        cfg = _resolve_config(args)
        if args.command == "init-config":
            path = args.config or "probseg.json"
            save_config(cfg, path)
            print(f"wrote {path}")
            return 0
        if args.command == "phantom":
            ids = cmd_phantom(cfg, echo)
            print(f"generated {len(ids)} phantom patients in {cfg.data_root}/raw")
        elif args.command == "preprocess":
            lines = cmd_preprocess(cfg, echo)
            kept = sum(1 for l in lines if l["included"])
            print(f"preprocessed {kept}/{len(lines)} patients")
        elif args.command == "split":
            out = cmd_split(cfg, echo)
            print(f"test={out['test']} folds over {len(out['train'])} patients")
        elif args.command == "train":
            cmd_train(cfg, echo=echo)
            print("training complete")
        elif args.command == "predict":
            cmd_predict(cfg, echo=echo)
            print("predictions written")
        elif args.command == "reconstruct":
            cmd_reconstruct(cfg, echo=echo)
            print("probability volumes reconstructed")
        elif args.command == "ensemble":
            cmd_ensemble(cfg, echo=echo)
            print("fold ensembles written")
        elif args.command == "evaluate":
            rows = cmd_evaluate(cfg, echo)
            print(f"evaluated {len(rows)} sweep rows -> {cfg.data_root}/eval/sweep.csv")
        elif args.command == "report":
            cmd_report(cfg, echo)
            print(f"reports written to {cfg.data_root}/eval")
        elif args.command == "serve":
            import uvicorn

            from .server import create_app
            uvicorn.run(create_app(cfg), host=args.host, port=args.port)
    except MissingStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
