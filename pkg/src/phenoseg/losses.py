"""Training losses: point cross-entropy, Lovasz-Softmax, prediction alignment.

All three consume probability maps (not logits) and return scalar graph
nodes, so gradients flow back through the heads. The Lovasz loss treats the
sorting permutation as a constant in backward (the standard subgradient).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data.labelmap import UNLABELED
from .errors import DimensionError

PROB_FLOOR = 1e-12


@dataclass
class LossReport:
    """Scalar summary of one training step or epoch."""

    loss_points: float
    loss_spatial: float
    loss_align: float
    lambda_align: float

    @property
    def total(self) -> float:
        return self.loss_points + self.loss_spatial + self.lambda_align * self.loss_align

    def to_dict(self) -> dict:
        return {"loss_points": self.loss_points, "loss_spatial": self.loss_spatial,
                "loss_align": self.loss_align, "lambda_align": self.lambda_align,
                "loss_total": self.total}


def point_ce(p_temp: Tensor, rows, cols, classes) -> Tensor:
    """Mean negative log-likelihood over the annotated pixels only.

    Probabilities are clamped to >= 1e-12 before the log. An empty point set
    contributes exactly 0 (the caller keeps a warning counter).
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return Tensor(np.zeros((), dtype=p_temp.dtype))
    cols = np.asarray(cols, dtype=np.int64)
    classes = np.asarray(classes, dtype=np.int64)
    picked = p_temp[rows, cols]                       # (N, K)
    probs = picked[np.arange(rows.size), classes]     # (N,)
    logp = ad.log(ad.maximum(probs, PROB_FLOOR))
    return ad.neg(ad.mean(logp))


def lovasz_grad(gt_sorted: np.ndarray) -> np.ndarray:
    """Discrete gradient of the Jaccard Lovasz extension.

    ``gt_sorted`` is the 0/1 ground-truth indicator ordered by decreasing
    error; entry i is J(i) - J(i-1) with J(i) the Jaccard error of flagging
    the top-i pixels.
    """
    gts = gt_sorted.sum()
    intersection = gts - np.cumsum(gt_sorted)
    union = gts + np.cumsum(1.0 - gt_sorted)
    jaccard = 1.0 - intersection / union
    if len(gt_sorted) > 1:
        jaccard[1:] = jaccard[1:] - jaccard[:-1]
    return jaccard


def lovasz_softmax(p_spat: Tensor, labels: np.ndarray,
                   unlabeled: int = UNLABELED) -> Tensor:
    """Lovasz-Softmax over the labeled pixels of a (partial) label map.

    For each class present among the labeled pixels, the per-pixel errors
    (1 - p_c where the label is c, p_c elsewhere) are sorted descending and
    dotted with the Lovasz-extension gradient of the sorted ground-truth
    indicator; the result is averaged over the present classes. A map with no
    labeled pixels contributes exactly 0.
    """
    k = p_spat.shape[-1]
    flat_p = ad.reshape(p_spat, (-1, k))
    y = np.asarray(labels).reshape(-1)
    if flat_p.shape[0] != y.size:
        raise DimensionError(
            f"probabilities {p_spat.shape} do not cover {labels.shape} labels")
    keep = np.nonzero(y != unlabeled)[0]
    if keep.size == 0:
        return Tensor(np.zeros((), dtype=p_spat.dtype))
    pl = flat_p[keep]
    yl = y[keep]
    present = np.unique(yl)
    dtype = p_spat.dtype

    per_class = []
    for c in present:
        fg = (yl == c).astype(dtype)
        pc = pl[:, int(c)]
        # errors: 1 - p_c on foreground, p_c on background (linear in p_c)
        m = ad.add(Tensor(fg), ad.mul(pc, Tensor(1.0 - 2.0 * fg)))
        order = np.argsort(-m.data, kind="stable")
        grad = lovasz_grad(fg[order].astype(np.float64)).astype(dtype)
        per_class.append(ad.sum_(ad.mul(m[order], Tensor(grad))))
    total = per_class[0]
    for term in per_class[1:]:
        total = ad.add(total, term)
    return ad.mul(total, 1.0 / len(per_class))


def alignment_mse(p_temp: Tensor, p_spat: Tensor,
                  valid: np.ndarray | None = None) -> Tensor:
    """Mean over pixels of the squared distance between the two distributions."""
    if p_temp.shape != p_spat.shape:
        raise DimensionError(
            f"alignment_mse: shapes {p_temp.shape} and {p_spat.shape} differ")
    diff = ad.sub(p_temp, p_spat)
    sq = ad.mul(diff, diff)
    if valid is None:
        n_pixels = int(np.prod(p_temp.shape[:-1]))
        return ad.mul(ad.sum_(sq), 1.0 / n_pixels)
    mask = np.asarray(valid, dtype=p_temp.dtype)
    count = float(mask.sum())
    if count == 0:
        return Tensor(np.zeros((), dtype=p_temp.dtype))
    per_pixel = ad.sum_(sq, axis=-1)
    return ad.mul(ad.sum_(ad.mul(per_pixel, Tensor(mask))), 1.0 / count)


def total_loss(l_points: Tensor, l_spatial: Tensor, l_align: Tensor,
               lambda_align: float = 1.0) -> Tensor:
    """L_total = L_t + L_s + lambda_a * L_a (gradients flow to all terms)."""
    return ad.add(ad.add(l_points, l_spatial), ad.mul(l_align, float(lambda_align)))
