"""Parameter containers and seeded initializers.

Modules register parameters and submodules in attribute-assignment order, so
``named_parameters()`` is deterministic and checkpoints serialize the same way
on every run.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .tensor import Tensor


class Parameter:
    """A named tensor; frozen parameters never receive optimizer updates."""

    __slots__ = ("tensor", "name", "trainable")

    def __init__(self, data, name: str = "", trainable: bool = True, dtype=None):
        self.tensor = Tensor(data, dtype=dtype)
        self.name = name
        self.trainable = trainable

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self):
        return self.tensor.grad

    def zero_grad(self) -> None:
        self.tensor.zero_grad()

    def __repr__(self):
        flag = "" if self.trainable else ", frozen"
        return f"Parameter({self.name!r}, shape={self.data.shape}{flag})"


class Module:
    """Minimal parameter container with recursive, ordered traversal."""

    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_modules", {})

    def __setattr__(self, key, value):
        if isinstance(value, Parameter):
            self._params[key] = value
        elif isinstance(value, Module):
            self._modules[key] = value
        object.__setattr__(self, key, value)

    def named_parameters(self, prefix: str = "") -> Iterator[Parameter]:
        for key, param in self._params.items():
            param.name = f"{prefix}{key}"
            yield param
        for key, child in self._modules.items():
            yield from child.named_parameters(prefix=f"{prefix}{key}.")

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters())

    def trainable_parameters(self) -> list[Parameter]:
        return [p for p in self.named_parameters() if p.trainable]

    def zero_grad(self) -> None:
        for p in self.named_parameters():
            p.zero_grad()

    def freeze(self) -> None:
        for p in self.named_parameters():
            p.trainable = False

    def state_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.data.copy() for p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for p in self.named_parameters():
            if p.name not in state:
                raise KeyError(f"missing parameter {p.name!r} in state dict")
            src = np.asarray(state[p.name], dtype=p.data.dtype)
            if src.shape != p.data.shape:
                raise ValueError(
                    f"parameter {p.name!r}: shape {src.shape} != {p.data.shape}")
            p.tensor.data = src.copy()


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int,
                   dtype=np.float32) -> np.ndarray:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def dense_init(rng: np.random.Generator, n_in: int, n_out: int, dtype=np.float32):
    """Weight and zero bias for a dense layer."""
    w = glorot_uniform(rng, (n_in, n_out), n_in, n_out, dtype)
    b = np.zeros(n_out, dtype=dtype)
    return w, b


def conv_init(rng: np.random.Generator, k: int, cin: int, cout: int, dtype=np.float32):
    """Weight and zero bias for a k x k convolution."""
    fan_in = k * k * cin
    fan_out = k * k * cout
    w = glorot_uniform(rng, (k, k, cin, cout), fan_in, fan_out, dtype)
    b = np.zeros(cout, dtype=dtype)
    return w, b
