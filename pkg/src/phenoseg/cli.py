"""Batch command-line interface.

Subcommands: synth | train | grow | predict | eval. A JSON config file with
``scene`` / ``train`` / ``grow`` sections seeds the run; individual flags
override their file keys, and the effective configuration is echoed into the
run manifest. Exit codes: 0 ok, 2 usage/config, 3 runtime/divergence, 4 I/O.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .data import (read_cube, read_label_map, read_points, write_cube,
                   write_label_map, write_points)
from .data.cube import TimeSeriesCube
from .data.points import SparsePointSet
from .errors import (ConfigurationError, DataFormatError, DivergenceError,
                     PhenosegError)
from .grow import GrowParams, grow, seeds_from_points
from .metrics import evaluate, evaluate_at_points, write_report
from .model import ModelConfig, SegmentationModel
from .synth import ClassTemporalProfile, SceneConfig, default_scene_config, generate_scene
from .train import (TrainConfig, load_checkpoint, patchify, predict_canvas,
                    save_checkpoint, train, write_manifest)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


# ---------------------------------------------------------------------------
# configuration file handling
# ---------------------------------------------------------------------------

_SECTIONS = ("scene", "train", "grow")


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: config root must be an object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigurationError(f"{path}: unknown config sections {sorted(unknown)}")
    return data


def scene_config_from_dict(data: dict) -> SceneConfig:
    known = set(SceneConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown scene config keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "profiles" in kwargs:
        profiles = []
        for i, entry in enumerate(kwargs["profiles"]):
            pknown = set(ClassTemporalProfile.__dataclass_fields__)
            punknown = set(entry) - pknown
            if punknown:
                raise ConfigurationError(
                    f"unknown profile keys in profiles[{i}]: {sorted(punknown)}")
            entry = dict(entry)
            if "baseline" in entry:
                entry["baseline"] = tuple(entry["baseline"])
            profiles.append(ClassTemporalProfile(**entry))
        kwargs["profiles"] = profiles
    return dataclasses.replace(default_scene_config(), **kwargs)


def scene_config_to_dict(cfg: SceneConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["profiles"] = [dict(p, baseline=list(p["baseline"])) for p in d["profiles"]]
    return d


def build_configs(args) -> tuple[SceneConfig, TrainConfig, GrowParams]:
    file_cfg = load_config_file(args.config) if args.config else {}
    scene = scene_config_from_dict(file_cfg.get("scene", {}))
    train_cfg = TrainConfig.from_dict(file_cfg.get("train", {}))
    grow_overrides = file_cfg.get("grow", {})
    if grow_overrides:
        known = set(GrowParams.__dataclass_fields__)
        unknown = set(grow_overrides) - known
        if unknown:
            raise ConfigurationError(f"unknown grow config keys: {sorted(unknown)}")
        train_cfg.grow = GrowParams(**{**train_cfg.grow.to_dict(), **grow_overrides})

    if getattr(args, "seed", None) is not None:
        scene = dataclasses.replace(scene, seed=args.seed)
        train_cfg.seed = args.seed
    if getattr(args, "tau", None) is not None:
        train_cfg.grow = dataclasses.replace(train_cfg.grow, tau=args.tau)
    if getattr(args, "lambda_a", None) is not None:
        train_cfg.lambda_align = args.lambda_a
    if getattr(args, "refresh_k", None) is not None:
        train_cfg.grow = dataclasses.replace(train_cfg.grow,
                                             refresh_every=args.refresh_k)
    if getattr(args, "epochs", None) is not None:
        train_cfg.epochs = args.epochs
    if getattr(args, "patch", None) is not None:
        train_cfg.patch_size = args.patch
    if getattr(args, "threads", None) is not None:
        train_cfg.threads = args.threads
    if getattr(args, "deterministic", False):
        train_cfg.deterministic = True
    train_cfg.validate()
    return scene, train_cfg, train_cfg.grow


def _require_inputs(*paths) -> None:
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise ConfigurationError(f"input file not found: {p}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    scene, _, _ = build_configs(args)
    cube, truth, points = generate_scene(scene)
    os.makedirs(args.out_dir, exist_ok=True)
    write_cube(cube, os.path.join(args.out_dir, "cube.wstc"))
    write_label_map(truth, os.path.join(args.out_dir, "truth.wstc"))
    write_points(points, os.path.join(args.out_dir, "points.csv"))
    with open(os.path.join(args.out_dir, "scene.json"), "w", encoding="utf-8") as f:
        json.dump(scene_config_to_dict(scene), f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote cube.wstc, truth.wstc, points.csv to {args.out_dir}")
    return EXIT_OK


def cmd_train(args) -> int:
    _require_inputs(args.cube, args.points, args.truth)
    _, train_cfg, _ = build_configs(args)
    cube = read_cube(args.cube)
    points = read_points(args.points, cube.H, cube.W)
    truth = read_label_map(args.truth) if args.truth else None
    result = train(train_cfg, cube, points, truth)
    os.makedirs(args.out_dir, exist_ok=True)
    ckpt_cfg = {"train": train_cfg.to_dict(), "model": result.model.config.to_dict()}
    save_checkpoint(os.path.join(args.out_dir, "checkpoint.psck"),
                    result.model.parameters(), ckpt_cfg)
    write_manifest(result.manifest, os.path.join(args.out_dir, "manifest.json"))
    write_label_map(result.pseudo_map.labels,
                    os.path.join(args.out_dir, "pseudo_labels.wstc"))
    val_f1 = result.manifest["val_metrics"]["macro_f1"]
    print(f"trained {train_cfg.epochs} epochs; validation macro-F1 = {val_f1:.4f}")
    return EXIT_OK


def cmd_grow(args) -> int:
    _require_inputs(args.cube, args.points)
    _, train_cfg, grow_params = build_configs(args)
    cube = read_cube(args.cube)
    points = read_points(args.points, cube.H, cube.W)
    label_map = grow(seeds_from_points(points, cube), cube, grow_params.tau)
    write_label_map(label_map.labels, args.out)
    print(f"labeled fraction {label_map.labeled_fraction():.4f} at "
          f"tau={grow_params.tau}")
    return EXIT_OK


def cmd_predict(args) -> int:
    _require_inputs(args.checkpoint, args.cube, args.points)
    ckpt_cfg, state, _ = load_checkpoint(args.checkpoint)
    model = SegmentationModel(ModelConfig(**ckpt_cfg["model"]))
    model.load_state_dict(state)
    cube = read_cube(args.cube)
    if args.points:
        points = read_points(args.points, cube.H, cube.W)
    else:
        points = SparsePointSet(np.array([], dtype=np.int64),
                                np.array([], dtype=np.int64),
                                np.array([], dtype=np.int64),
                                cube.H, cube.W,
                                class_count=model.config.class_count)
    patch = ckpt_cfg["train"]["patch_size"]
    threads = args.threads if args.threads else 1
    samples = patchify(cube, points, None, patch)
    p_temp, _ = predict_canvas(model, cube, samples, threads)
    labels = p_temp.argmax(axis=-1).astype(np.uint8)
    os.makedirs(args.out_dir, exist_ok=True)
    write_label_map(labels, os.path.join(args.out_dir, "label_map.wstc"))
    prob_cube = TimeSeriesCube(p_temp[None, ...], np.array([0], dtype=np.int32))
    write_cube(prob_cube, os.path.join(args.out_dir, "probabilities.wstc"))
    print(f"wrote label_map.wstc and probabilities.wstc to {args.out_dir}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if (args.truth is None) == (args.truth_points is None):
        raise ConfigurationError("provide exactly one of --truth / --truth-points")
    _require_inputs(args.pred, args.truth, args.truth_points)
    pred = read_label_map(args.pred)
    if args.truth:
        truth = read_label_map(args.truth)
        report = evaluate(pred, truth)
    else:
        points = read_points(args.truth_points, *pred.shape)
        report = evaluate_at_points(pred, points)
    os.makedirs(args.out_dir, exist_ok=True)
    write_report(report, os.path.join(args.out_dir, "report.txt"),
                 os.path.join(args.out_dir, "report.json"))
    print(report.to_text(), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (scene/train/grow sections)")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--tau", type=float, help="region-growing cosine threshold")
    p.add_argument("--lambda-a", dest="lambda_a", type=float,
                   help="alignment loss weight")
    p.add_argument("--refresh-k", dest="refresh_k", type=int,
                   help="pseudo-label refresh period in epochs")
    p.add_argument("--epochs", type=int)
    p.add_argument("--patch", type=int, help="patch size in pixels")
    p.add_argument("--threads", type=int, help="worker pool size")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded, bit-reproducible mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phenoseg",
        description="Weakly-supervised time-series segmentation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic ground-truthed scene")
    _add_common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train on a cube with sparse point labels")
    _add_common(p)
    p.add_argument("--cube", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--truth", help="dense truth label map (metrics only)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grow", help="region-grow a pseudo-label map from points")
    _add_common(p)
    p.add_argument("--cube", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("predict", help="predict dense labels with a checkpoint")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--cube", required=True)
    p.add_argument("--points", help="optional prompt points CSV")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score a predicted label map")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", help="dense truth label map")
    p.add_argument("--truth-points", dest="truth_points",
                   help="sparse truth points CSV")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except PhenosegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
