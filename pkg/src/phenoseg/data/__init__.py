"""Cube / point / label-map data model, file formats and ingestion."""

from .cube import TimeSeriesCube, read_cube, write_cube
from .ingest import (MaskedImage, RawScene, SceneObservation, apply_cloud_mask,
                     median_composite)
from .labelmap import UNLABELED, PseudoLabelMap, read_label_map, write_label_map
from .points import SparsePointSet, read_points, write_points

__all__ = [
    "TimeSeriesCube", "read_cube", "write_cube",
    "SparsePointSet", "read_points", "write_points",
    "PseudoLabelMap", "UNLABELED", "read_label_map", "write_label_map",
    "RawScene", "SceneObservation", "MaskedImage",
    "apply_cloud_mask", "median_composite",
]
