"""Temporal-constrained region growing: the spatial-branch pseudo-label engine.

Growing is never part of the gradient graph; it turns sparse seeds into dense
partial label maps by admitting 4-adjacent pixels whose temporal trajectory
has cosine similarity strictly above tau with the originating seed's
trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import SparsePointSet, TimeSeriesCube
from ..data.labelmap import UNLABELED, PseudoLabelMap
from ..errors import ConfigurationError, DimensionError
from ._backend import BACKEND, grow_kernel

GROUND_TRUTH = "ground_truth"
PSEUDO = "pseudo"


@dataclass
class Seed:
    """A growth source: position, class, and the reference trajectory."""

    row: int
    col: int
    class_id: int
    profile: np.ndarray
    origin: str = GROUND_TRUTH

    def __post_init__(self):
        self.profile = np.ascontiguousarray(self.profile, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.profile)):
            raise ConfigurationError(f"seed at ({self.row},{self.col}) has a "
                                     "non-finite profile")


@dataclass
class GrowParams:
    """Knobs of the growing/densification cycle."""

    tau: float = 0.90
    connectivity: int = 4
    confidence: float = 0.95
    refresh_every: int = 5
    radius: int = 16

    def __post_init__(self):
        if not -1.0 < self.tau <= 1.0:
            raise ConfigurationError(f"tau {self.tau} outside (-1, 1]")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigurationError(f"confidence {self.confidence} outside (0, 1)")
        if self.connectivity != 4:
            raise ConfigurationError("only 4-connectivity is supported")
        if self.refresh_every < 1 or self.radius < 1:
            raise ConfigurationError("refresh_every and radius must be >= 1")

    def to_dict(self) -> dict:
        return {"tau": self.tau, "connectivity": self.connectivity,
                "confidence": self.confidence, "refresh_every": self.refresh_every,
                "radius": self.radius}


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two (flattened) trajectories; zero-norm inputs give 0."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DimensionError(f"profiles of length {a.size} and {b.size} differ")
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


def seeds_from_points(points: SparsePointSet, cube: TimeSeriesCube) -> list[Seed]:
    """Ground-truth seeds carrying their own pixel trajectories."""
    return [Seed(int(r), int(c), int(k), cube.values[:, r, c, :], GROUND_TRUTH)
            for r, c, k in zip(points.rows, points.cols, points.classes)]


def _run_kernel(labels: np.ndarray, cube: TimeSeriesCube, seeds: list[Seed],
                tau: float, radii: np.ndarray) -> np.ndarray:
    h, w = cube.H, cube.W
    for s in seeds:
        if not (0 <= s.row < h and 0 <= s.col < w):
            raise ConfigurationError(
                f"seed at ({s.row},{s.col}) outside {h}x{w} canvas")
    profiles = cube.pixel_profiles().astype(np.float64)
    pixel_norms = np.linalg.norm(profiles, axis=1)
    length = profiles.shape[1]
    n = len(seeds)
    seed_profiles = np.zeros((max(n, 1), length), dtype=np.float64)
    for i, s in enumerate(seeds):
        if s.profile.size != length:
            raise DimensionError(
                f"seed profile length {s.profile.size} != cube profile {length}")
        seed_profiles[i] = s.profile
    seed_norms = np.linalg.norm(seed_profiles, axis=1)
    grow_kernel(labels, profiles, pixel_norms,
                np.array([s.row for s in seeds], dtype=np.int64),
                np.array([s.col for s in seeds], dtype=np.int64),
                np.array([s.class_id for s in seeds], dtype=np.int64),
                seed_profiles, seed_norms,
                np.asarray(radii, dtype=np.int64), float(tau))
    return labels


def grow(seeds: list[Seed], cube: TimeSeriesCube, tau: float) -> PseudoLabelMap:
    """Unrestricted breadth-first growth from the given seeds (iteration 0).

    Deterministic: seeds are processed in input order with a FIFO frontier and
    first-claim conflict resolution; unreached pixels stay UNLABELED.
    """
    labels = np.full((cube.H, cube.W), UNLABELED, dtype=np.uint8)
    radii = np.full(len(seeds), -1, dtype=np.int64)
    _run_kernel(labels, cube, seeds, tau, radii)
    return PseudoLabelMap(labels, iteration=0)


def extract_pseudo_seeds(p_temp: np.ndarray, labels: np.ndarray,
                         cube: TimeSeriesCube,
                         confidence: float = 0.95) -> list[Seed]:
    """Unlabeled pixels whose top class probability strictly exceeds the bar.

    Candidates carry their argmax class and their own trajectory, in raster
    order.
    """
    if p_temp.shape[:2] != labels.shape:
        raise DimensionError(
            f"probability map {p_temp.shape} vs label map {labels.shape}")
    conf = p_temp.max(axis=-1)
    classes = p_temp.argmax(axis=-1)
    rows, cols = np.nonzero((labels == UNLABELED) & (conf > confidence))
    return [Seed(int(r), int(c), int(classes[r, c]), cube.values[:, r, c, :], PSEUDO)
            for r, c in zip(rows, cols)]


def neighborhood_filter(candidates: list[Seed], p_temp: np.ndarray) -> list[Seed]:
    """Keep candidates whose class is the strict majority of its 3x3 window.

    The window includes the pixel itself and is clipped at borders; a
    candidate survives when its argmax class covers more than half of the
    window pixels.
    """
    h, w = p_temp.shape[:2]
    argmax = p_temp.argmax(axis=-1)
    agree = np.zeros((h, w), dtype=np.int32)
    size = np.zeros((h, w), dtype=np.int32)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            src = (slice(max(0, -dr), h - max(0, dr)),
                   slice(max(0, -dc), w - max(0, dc)))
            dst = (slice(max(0, dr), h - max(0, -dr)),
                   slice(max(0, dc), w - max(0, -dc)))
            agree[dst] += argmax[dst] == argmax[src]
            size[dst] += 1
    keep = 2 * agree > size
    return [s for s in candidates if keep[s.row, s.col]]


def densify(m_prev: PseudoLabelMap, gt_seeds: list[Seed],
            pseudo_seeds: list[Seed], cube: TimeSeriesCube, tau: float,
            radius: int = 16) -> PseudoLabelMap:
    """Locally expand the map around new pseudo-seeds.

    Existing labels (all of which trace back to ground truth or earlier
    iterations) are kept as-is, so the labeled fraction never decreases and
    ground-truth pixels never change class. Growth from each pseudo-seed is
    capped at Chebyshev radius ``radius``; pseudo-seeds landing on an already
    labeled pixel are dropped.
    """
    labels = m_prev.labels.copy()
    for s in gt_seeds:
        if labels[s.row, s.col] != s.class_id:
            raise ConfigurationError(
                f"ground-truth point at ({s.row},{s.col}) lost its class in the "
                "previous map")
    active = [s for s in pseudo_seeds if labels[s.row, s.col] == UNLABELED]
    radii = np.full(len(active), radius, dtype=np.int64)
    _run_kernel(labels, cube, active, tau, radii)
    assert np.count_nonzero(labels != UNLABELED) >= \
        np.count_nonzero(m_prev.labels != UNLABELED)
    return PseudoLabelMap(labels, iteration=m_prev.iteration + 1)


def backend_name() -> str:
    return BACKEND
