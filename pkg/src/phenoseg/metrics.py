"""Evaluation metrics: per-class and macro precision / recall / F1."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import SparsePointSet
from .data.labelmap import UNLABELED
from .errors import DimensionError, EvaluationError


@dataclass
class ClassScore:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        d = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / d if d else 0.0


@dataclass
class EvalReport:
    """Per-class counts/scores plus unweighted macro averages.

    Classes absent from the truth are excluded from the macro means; a class
    present in truth but never predicted scores 0 by convention.
    """

    per_class: dict[int, ClassScore] = field(default_factory=dict)

    @property
    def macro_precision(self) -> float:
        return float(np.mean([s.precision for s in self.per_class.values()]))

    @property
    def macro_recall(self) -> float:
        return float(np.mean([s.recall for s in self.per_class.values()]))

    @property
    def macro_f1(self) -> float:
        return float(np.mean([s.f1 for s in self.per_class.values()]))

    def to_dict(self) -> dict:
        return {
            "per_class": {
                str(c): {"tp": s.tp, "fp": s.fp, "fn": s.fn,
                         "precision": s.precision, "recall": s.recall, "f1": s.f1}
                for c, s in sorted(self.per_class.items())
            },
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
        }

    def to_text(self) -> str:
        lines = []
        for c, s in sorted(self.per_class.items()):
            lines.append(f"class_{c}.precision = {s.precision:.6f}")
            lines.append(f"class_{c}.recall = {s.recall:.6f}")
            lines.append(f"class_{c}.f1 = {s.f1:.6f}")
        lines.append(f"macro.precision = {self.macro_precision:.6f}")
        lines.append(f"macro.recall = {self.macro_recall:.6f}")
        lines.append(f"macro.f1 = {self.macro_f1:.6f}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def evaluate(pred: np.ndarray, truth: np.ndarray,
             unlabeled: int = UNLABELED) -> EvalReport:
    """Score a predicted label map against the pixels whose truth is known."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionError(f"pred {pred.shape} vs truth {truth.shape}")
    known = truth != unlabeled
    if not known.any():
        raise EvaluationError("no pixels with known truth to evaluate")
    p = pred[known].astype(np.int64)
    t = truth[known].astype(np.int64)
    report = EvalReport()
    for c in np.unique(t):
        tp = int(np.sum((p == c) & (t == c)))
        fp = int(np.sum((p == c) & (t != c)))
        fn = int(np.sum((p != c) & (t == c)))
        report.per_class[int(c)] = ClassScore(tp, fp, fn)
    return report


def evaluate_at_points(pred: np.ndarray, points: SparsePointSet) -> EvalReport:
    """Evaluate only at sparse annotated coordinates."""
    truth = np.full(pred.shape, UNLABELED, dtype=np.int64)
    truth[points.rows, points.cols] = points.classes
    return evaluate(pred, truth)


def write_report(report: EvalReport, text_path, json_path) -> None:
    with open(text_path, "w", encoding="utf-8") as f:
        f.write(report.to_text())
    with open(json_path, "w", encoding="utf-8") as f:
        f.write(report.to_json())
