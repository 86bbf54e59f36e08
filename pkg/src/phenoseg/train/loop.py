"""End-to-end weakly-supervised training with the pseudo-label refresh cycle.

Supervision at (0-indexed) epoch e is exactly the pseudo-label map of
iteration floor(e / refresh_every): the map is refreshed at the end of every
refresh_every-th epoch by running the temporal head over the full canvas,
extracting high-confidence pseudo-seeds, filtering them for 3x3 consistency,
and densifying the map locally around the survivors.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..data import SparsePointSet, TimeSeriesCube
from ..data.labelmap import UNLABELED, PseudoLabelMap
from ..errors import DivergenceError
from ..grow import (densify, extract_pseudo_seeds, grow, neighborhood_filter,
                    seeds_from_points)
from ..losses import alignment_mse, lovasz_softmax, point_ce, total_loss
from ..metrics import EvalReport, evaluate
from ..model import ModelConfig, SegmentationModel
from .config import TrainConfig
from .data import PatchSample, augment, patchify, slice_canvas_labels, split
from .optim import AdamW


@dataclass
class TrainResult:
    model: SegmentationModel
    manifest: dict
    pseudo_map: PseudoLabelMap
    val_samples: list = field(default_factory=list)


def build_model(config: TrainConfig, class_count: int, channels: int,
                frames: int, init_seed: int) -> SegmentationModel:
    mc = ModelConfig(class_count=class_count, channels=channels, frames=frames,
                     base_width=config.base_width,
                     bottleneck_ratio=config.bottleneck_ratio,
                     attention_heads=config.attention_heads,
                     context_slots=config.context_slots,
                     decoder_blocks=config.decoder_blocks,
                     trend_kernel=config.trend_kernel,
                     seed=init_seed)
    return SegmentationModel(mc)


def _predict_sample(model: SegmentationModel, timestamps: np.ndarray,
                    sample: PatchSample):
    return model.predict(sample.cube, timestamps, sample.rows, sample.cols,
                         sample.classes)


def predict_canvas(model: SegmentationModel, cube: TimeSeriesCube,
                   samples: list[PatchSample], threads: int = 1):
    """Stitch per-patch predictions back onto the canvas.

    Patches are independent and write disjoint regions, so the thread pool
    changes nothing in the output.
    """
    k = model.config.class_count
    h, w = cube.H, cube.W
    p_temp = np.zeros((h, w, k), dtype=np.float32)
    p_spat = np.zeros((h, w, k), dtype=np.float32)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda s: _predict_sample(model, cube.timestamps, s), samples))
    else:
        results = [_predict_sample(model, cube.timestamps, s) for s in samples]
    for sample, (pt, ps) in zip(samples, results):
        r0, c0 = sample.origin
        r1, c1 = min(r0 + sample.patch_size, h), min(c0 + sample.patch_size, w)
        p_temp[r0:r1, c0:c1] = pt[:r1 - r0, :c1 - c0]
        p_spat[r0:r1, c0:c1] = ps[:r1 - r0, :c1 - c0]
    return p_temp, p_spat


def _pseudo_precision(labels: np.ndarray, truth: np.ndarray | None):
    if truth is None:
        return None
    mask = labels != UNLABELED
    if not mask.any():
        return None
    return float(np.mean(labels[mask] == truth[mask]))


def _val_report(model, cube, val_samples, truth, threads) -> tuple[EvalReport, np.ndarray]:
    p_temp, _ = predict_canvas(model, cube, val_samples, threads)
    pred = p_temp.argmax(axis=-1).astype(np.uint8)
    ref = np.full(pred.shape, UNLABELED, dtype=np.int64)
    for s in val_samples:
        r0, c0 = s.origin
        r1 = min(r0 + s.patch_size, cube.H)
        c1 = min(c0 + s.patch_size, cube.W)
        if truth is not None:
            ref[r0:r1, c0:c1] = truth[r0:r1, c0:c1]
        else:
            keep = (s.rows < r1 - r0) & (s.cols < c1 - c0)
            ref[s.rows[keep] + r0, s.cols[keep] + c0] = s.classes[keep]
    return evaluate(pred, ref), pred


def train(config: TrainConfig, cube: TimeSeriesCube, points: SparsePointSet,
          truth: np.ndarray | None = None) -> TrainResult:
    """Run the full dual-branch loop; returns the model and its manifest."""
    config.validate()
    threads = 1 if config.deterministic else config.threads
    seed_seq = np.random.SeedSequence(config.seed)
    init_seed, split_seed, order_seed, aug_seed = (
        int(s.generate_state(1)[0]) for s in seed_seq.spawn(4))

    model = build_model(config, points.class_count, cube.C, cube.T, init_seed)
    frozen_before = {p.name: p.data.tobytes()
                     for p in model.named_parameters() if not p.trainable}

    samples = patchify(cube, points, truth, config.patch_size)
    train_samples, val_samples = split(samples, config.split_ratio, split_seed)

    gt_seeds = seeds_from_points(points, cube)
    pseudo = grow(gt_seeds, cube, config.grow.tau)
    refresh_log = [{
        "epoch": 0,
        "iteration": pseudo.iteration,
        "labeled_fraction": pseudo.labeled_fraction(),
        "new_pseudo_seeds": 0,
        "precision_vs_truth": _pseudo_precision(pseudo.labels, truth),
    }]

    optimizer = AdamW(model.parameters(), lr=config.learning_rate,
                      weight_decay=config.weight_decay,
                      betas=(config.beta1, config.beta2), eps=config.adam_eps,
                      grad_clip=config.grad_clip)
    order_rng = np.random.default_rng(order_seed)
    aug_rng = np.random.default_rng(aug_seed)

    epoch_log = []
    empty_point_samples = 0
    for epoch in range(config.epochs):
        order = order_rng.permutation(len(train_samples))
        sums = np.zeros(4)
        n_done = 0
        n_finite = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_samples[i] for i in order[start:start + config.batch_size]]
            optimizer.zero_grad()
            for sample in batch:
                sample.pseudo = slice_canvas_labels(pseudo.labels, sample.origin,
                                                    sample.patch_size)
                work = augment(sample, aug_rng) if config.augment else sample
                p_temp, p_spat = model.forward(work.cube, cube.timestamps,
                                               work.rows, work.cols, work.classes)
                if work.n_points == 0:
                    empty_point_samples += 1
                l_t = point_ce(p_temp, work.rows, work.cols, work.classes)
                if config.spatial_branch:
                    sup = work.pseudo.copy()
                    sup[~work.valid] = UNLABELED
                    l_s = lovasz_softmax(p_spat, sup)
                else:
                    from ..autodiff import Tensor
                    l_s = Tensor(np.zeros((), dtype=np.float32))
                mask = None if work.valid.all() else work.valid
                l_a = alignment_mse(p_temp, p_spat, mask)
                total = total_loss(l_t, l_s, l_a, config.lambda_align)
                scaled = total * (1.0 / len(batch))
                scaled.backward()
                vals = (float(l_t.data), float(l_s.data), float(l_a.data),
                        float(total.data))
                if np.isfinite(vals[3]):
                    n_finite += 1
                sums += np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
                n_done += 1
            optimizer.step()
        if n_done and n_finite == 0:
            raise DivergenceError(
                f"loss non-finite for all {n_done} samples of epoch {epoch}")
        means = sums / max(n_done, 1)
        epoch_log.append({
            "epoch": epoch,
            "loss_points": float(means[0]),
            "loss_spatial": float(means[1]),
            "loss_align": float(means[2]),
            "loss_total": float(means[3]),
            "pseudo_iteration": pseudo.iteration,
        })

        refresh_due = (config.spatial_branch
                       and (epoch + 1) % config.grow.refresh_every == 0
                       and epoch + 1 < config.epochs)
        if refresh_due:
            p_temp_canvas, _ = predict_canvas(model, cube, samples, threads)
            candidates = extract_pseudo_seeds(p_temp_canvas, pseudo.labels, cube,
                                              config.grow.confidence)
            survivors = neighborhood_filter(candidates, p_temp_canvas)
            pseudo = densify(pseudo, gt_seeds, survivors, cube,
                             config.grow.tau, config.grow.radius)
            refresh_log.append({
                "epoch": epoch + 1,
                "iteration": pseudo.iteration,
                "labeled_fraction": pseudo.labeled_fraction(),
                "new_pseudo_seeds": len(survivors),
                "precision_vs_truth": _pseudo_precision(pseudo.labels, truth),
            })

    report, _ = _val_report(model, cube, val_samples, truth, threads)
    frozen_after = {p.name: p.data.tobytes()
                    for p in model.named_parameters() if not p.trainable}
    assert frozen_after == frozen_before, "frozen parameters changed during training"

    manifest = {
        "code_version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "model": model.config.to_dict(),
        "grow_backend": __import__("phenoseg.grow", fromlist=["BACKEND"]).BACKEND,
        "epochs": epoch_log,
        "refreshes": refresh_log,
        "counters": {
            "skipped_steps": optimizer.skipped_steps,
            "clip_events": optimizer.clip_events,
            "empty_point_samples": empty_point_samples,
        },
        "val_patch_origins": [list(s.origin) for s in val_samples],
        "val_metrics": report.to_dict(),
    }
    return TrainResult(model, manifest, pseudo, val_samples)


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
