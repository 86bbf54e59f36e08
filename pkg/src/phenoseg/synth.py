"""Ground-truthed synthetic time-series scenes.

Each class occupies smooth blob-shaped regions (argmax of per-class bump
fields plus smoothed noise) and follows a seasonal reflectance trajectory

    value(t) = baseline + amplitude * sin(2*pi*t/T + phase) + events + N(0, sigma)

Pixels near region boundaries blend the neighbouring trajectories, producing
gradual transitions. The default 4-class layout uses phases (0, 60, 120, 240
degrees): with 12 monthly samples, some pair of classes has identical means at
every single date, so no single snapshot separates all classes, while the full
trajectories are far apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .data import SparsePointSet, TimeSeriesCube
from .errors import ConfigurationError

INTERIOR_PURITY = 0.999


@dataclass
class ClassTemporalProfile:
    """Seasonal trajectory parameters of one class."""

    baseline: tuple[float, ...] = (0.16, 0.14, 0.12)
    amplitude: float = 0.12
    phase: float = 0.0
    event_prob: float = 0.0
    event_magnitude: float = 0.10


@dataclass
class SceneConfig:
    height: int = 128
    width: int = 128
    frames: int = 12
    profiles: list = field(default_factory=list)
    blob_count: int = 5
    blob_radius: float = 15.0
    field_noise: float = 0.35
    field_noise_scale: float = 8.0
    boundary_softness: float = 1.0
    noise_sigma: float = 0.03
    points_per_class: int = 60
    seed: int = 0

    @property
    def class_count(self) -> int:
        return len(self.profiles)

    @property
    def channels(self) -> int:
        return len(self.profiles[0].baseline) if self.profiles else 0

    def validate(self) -> None:
        if not 2 <= self.class_count <= 5:
            raise ConfigurationError(
                f"need between 2 and 5 classes, got {self.class_count}")
        if self.frames < 1 or self.height < 8 or self.width < 8:
            raise ConfigurationError("scene dimensions too small")
        if 2 * self.blob_radius > min(self.height, self.width):
            raise ConfigurationError(
                f"blob radius {self.blob_radius} exceeds the canvas")
        if self.blob_count < 1:
            raise ConfigurationError("blob_count must be >= 1")
        channels = {len(p.baseline) for p in self.profiles}
        if len(channels) != 1:
            raise ConfigurationError("all profiles must share the channel count")
        for p in self.profiles:
            if any(not 0.0 <= b <= 1.0 for b in p.baseline):
                raise ConfigurationError("baselines must lie in [0, 1]")


def default_scene_config(seed: int = 0) -> SceneConfig:
    """The default phase-coded 4-class scene (see module docstring)."""
    phases = [0.0, math.pi / 3, 2 * math.pi / 3, 4 * math.pi / 3]
    profiles = [ClassTemporalProfile(phase=ph) for ph in phases]
    profiles[1] = replace(profiles[1], event_prob=0.015)
    profiles[3] = replace(profiles[3], event_prob=0.015)
    return SceneConfig(profiles=profiles, seed=seed)


def class_trajectories(config: SceneConfig) -> np.ndarray:
    """Noise-free (K, T, C) mean trajectory per class; timestamps are 1..T."""
    t = np.arange(1, config.frames + 1, dtype=np.float64)
    out = np.zeros((config.class_count, config.frames, config.channels))
    for k, prof in enumerate(config.profiles):
        seasonal = prof.amplitude * np.sin(2 * math.pi * t / config.frames + prof.phase)
        out[k] = np.asarray(prof.baseline)[None, :] + seasonal[:, None]
    return out


def _class_fields(config: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    """Per-class ownership fields: Gaussian bumps plus smoothed noise."""
    h, w, k = config.height, config.width, config.class_count
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    fields = np.zeros((k, h, w))
    margin = config.blob_radius * 0.5
    for c in range(k):
        for _ in range(config.blob_count):
            cy = rng.uniform(margin, h - margin)
            cx = rng.uniform(margin, w - margin)
            d2 = (yy - cy) ** 2 + (xx - cx) ** 2
            fields[c] += np.exp(-d2 / (2.0 * config.blob_radius ** 2))
    for c in range(k):
        noise = gaussian_filter(rng.standard_normal((h, w)),
                                sigma=config.field_noise_scale)
        std = noise.std()
        if std > 0:
            noise /= std
        fields[c] += config.field_noise * noise
    return fields


def generate_scene(config: SceneConfig, seed: int | None = None):
    """Build (cube, dense truth labels, sparse points) from a config and seed.

    Deterministic in (config, seed). Points are sampled uniformly inside the
    pure interior of each class region, the same number per class.
    """
    config.validate()
    rng = np.random.default_rng(config.seed if seed is None else seed)
    h, w, t, k = config.height, config.width, config.frames, config.class_count

    fields = _class_fields(config, rng)
    truth = np.argmax(fields, axis=0).astype(np.uint8)
    counts = np.bincount(truth.reshape(-1), minlength=k)
    if (counts == 0).any():
        missing = np.nonzero(counts == 0)[0].tolist()
        raise ConfigurationError(f"layout infeasible: classes {missing} own no pixels")

    onehot = np.zeros((k, h, w))
    onehot[truth, np.mgrid[0:h, 0:w][0], np.mgrid[0:h, 0:w][1]] = 1.0
    if config.boundary_softness > 0:
        weights = np.stack([gaussian_filter(onehot[c], config.boundary_softness)
                            for c in range(k)])
        weights /= weights.sum(axis=0, keepdims=True)
    else:
        weights = onehot

    trajectories = class_trajectories(config)                     # (K, T, C)
    values = np.einsum("khw,ktc->thwc", weights, trajectories)

    eps_map = np.array([p.event_prob for p in config.profiles])[truth]
    mag_map = np.array([p.event_magnitude for p in config.profiles])[truth]
    events = rng.random((t, h, w)) < eps_map[None]
    values += (events * mag_map[None])[..., None]

    if config.noise_sigma > 0:
        values += rng.normal(0.0, config.noise_sigma, size=values.shape)
    values = np.clip(values, 0.0, 1.0)

    cube = TimeSeriesCube(values.astype(np.float32),
                          np.arange(1, t + 1, dtype=np.int32))

    purity = weights[truth, np.mgrid[0:h, 0:w][0], np.mgrid[0:h, 0:w][1]]
    rows, cols, classes = [], [], []
    for c in range(k):
        interior = np.nonzero((truth == c) & (purity >= INTERIOR_PURITY))
        n_interior = len(interior[0])
        if n_interior < config.points_per_class:
            raise ConfigurationError(
                f"layout infeasible: class {c} has only {n_interior} interior "
                f"pixels for {config.points_per_class} points")
        pick = rng.choice(n_interior, size=config.points_per_class, replace=False)
        pick.sort()
        rows.extend(interior[0][pick])
        cols.extend(interior[1][pick])
        classes.extend([c] * config.points_per_class)

    points = SparsePointSet(np.array(rows), np.array(cols), np.array(classes),
                            height=h, width=w, class_count=k)
    return cube, truth, points


def corrupt_labels(points: SparsePointSet, noise_ratio: float,
                   seed: int) -> SparsePointSet:
    """Flip floor(noise_ratio * N) point labels to a uniformly different class."""
    if not 0.0 <= noise_ratio < 1.0:
        raise ConfigurationError(f"noise_ratio {noise_ratio} outside [0, 1)")
    n = len(points)
    n_flip = int(math.floor(noise_ratio * n))
    classes = points.classes.copy()
    if n_flip:
        rng = np.random.default_rng(seed)
        victims = rng.choice(n, size=n_flip, replace=False)
        draws = rng.integers(0, points.class_count - 1, size=n_flip)
        new = np.where(draws >= classes[victims], draws + 1, draws)
        classes[victims] = new
    return SparsePointSet(points.rows.copy(), points.cols.copy(), classes,
                          points.height, points.width, points.class_count)


def subsample_labels(points: SparsePointSet, keep_ratio: float,
                     seed: int) -> SparsePointSet:
    """Stratified subsample: each class keeps ceil(keep_ratio * N_class) >= 1 points."""
    if not 0.0 < keep_ratio <= 1.0:
        raise ConfigurationError(f"keep_ratio {keep_ratio} outside (0, 1]")
    rng = np.random.default_rng(seed)
    keep_idx = []
    for c in range(points.class_count):
        members = np.nonzero(points.classes == c)[0]
        if len(members) == 0:
            raise ConfigurationError(f"class {c} has no points to subsample")
        n_keep = max(1, math.ceil(keep_ratio * len(members)))
        chosen = rng.choice(len(members), size=n_keep, replace=False)
        keep_idx.append(members[np.sort(chosen)])
    keep = np.sort(np.concatenate(keep_idx))
    return SparsePointSet(points.rows[keep], points.cols[keep],
                          points.classes[keep], points.height, points.width,
                          points.class_count)
