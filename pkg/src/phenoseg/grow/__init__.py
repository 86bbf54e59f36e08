"""Region-growing pseudo-label engine (compiled kernel with pure fallback)."""

from ._backend import BACKEND
from .engine import (GROUND_TRUTH, PSEUDO, GrowParams, Seed, backend_name,
                     cosine_similarity, densify, extract_pseudo_seeds, grow,
                     neighborhood_filter, seeds_from_points)

__all__ = [
    "BACKEND", "backend_name",
    "Seed", "GrowParams", "GROUND_TRUTH", "PSEUDO",
    "cosine_similarity", "seeds_from_points", "grow",
    "extract_pseudo_seeds", "neighborhood_filter", "densify",
]
