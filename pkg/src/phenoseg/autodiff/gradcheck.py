"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError
from .tensor import Tensor


def grad_check(fn, inputs, epsilon: float = 1e-5, coords_per_input: int | None = None,
               rng: np.random.Generator | None = None) -> float:
    """Compare analytic and numeric gradients of a scalar function.

    ``fn`` maps the given float64 ``inputs`` (a list of Tensors) to a scalar
    Tensor. Each checked coordinate is perturbed by +-epsilon and the central
    difference is compared against the backward-pass gradient; the relative
    error uses max(|analytic|, |numeric|, 1e-8) as denominator. Returns the
    maximum relative error over all checked coordinates.

    ``coords_per_input`` caps how many coordinates of each input are probed
    (seeded subsample); by default every coordinate is checked.
    """
    inputs = list(inputs)
    for t in inputs:
        if t.data.dtype != np.float64:
            raise EvaluationError("grad_check requires float64 inputs")
        t.zero_grad()

    out = fn(*inputs)
    if out.data.size != 1:
        raise EvaluationError("grad_check requires a scalar-valued function")
    if not np.isfinite(out.data).all():
        raise EvaluationError("function value is non-finite")
    out.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy()
                for t in inputs]

    if rng is None:
        rng = np.random.default_rng(0)
    max_rel = 0.0
    for t, grad in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        n = flat.size
        if coords_per_input is not None and coords_per_input < n:
            coords = rng.choice(n, size=coords_per_input, replace=False)
        else:
            coords = range(n)
        gflat = grad.reshape(-1)
        for i in coords:
            saved = flat[i]
            flat[i] = saved + epsilon
            f_plus = float(fn(*inputs).data)
            flat[i] = saved - epsilon
            f_minus = float(fn(*inputs).data)
            flat[i] = saved
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise EvaluationError("function value is non-finite during probing")
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            max_rel = max(max_rel, abs(gflat[i] - numeric) / denom)
    return max_rel


def constant(data) -> Tensor:
    """Float64 tensor helper for gradient-check functions."""
    return Tensor(np.asarray(data, dtype=np.float64))
