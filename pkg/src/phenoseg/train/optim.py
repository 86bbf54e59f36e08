"""Adaptive-moment optimizer with decoupled weight decay."""

from __future__ import annotations

import numpy as np

from ..autodiff import Parameter


class AdamW:
    """Standard bias-corrected Adam update plus direct weight decay.

    Decay is decoupled: each step applies ``p -= lr * wd * p`` alongside the
    moment-based update, never through the gradients. Frozen parameters are
    skipped entirely. A step with any non-finite gradient is skipped whole
    (and counted); the global-norm clip is applied before the update.
    """

    def __init__(self, params: list[Parameter], lr: float = 1e-3,
                 weight_decay: float = 0.0, betas: tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8, grad_clip: float | None = None):
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.grad_clip = grad_clip
        self.t = 0
        self.skipped_steps = 0
        self.clip_events = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> bool:
        """Apply one update; returns False when skipped on non-finite grads."""
        live = [(i, p) for i, p in enumerate(self.params)
                if p.trainable and p.grad is not None]
        for _, p in live:
            if not np.all(np.isfinite(p.grad)):
                self.skipped_steps += 1
                return False

        if self.grad_clip is not None and live:
            total = np.sqrt(sum(float(np.sum(p.grad.astype(np.float64) ** 2))
                                for _, p in live))
            if total > self.grad_clip:
                scale = self.grad_clip / total
                for _, p in live:
                    p.tensor.grad = p.grad * scale
                self.clip_events += 1

        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for i, p in live:
            g = p.grad
            m = self._m[i]
            v = self._v[i]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.tensor.data = p.data - self.lr * update
        return True
