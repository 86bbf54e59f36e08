"""Differentiable operations: paired forward/backward implementations.

All functions accept `Tensor` operands (plain scalars/arrays are wrapped as
constants) and return a new `Tensor` wired into the graph. Backward closures
accumulate into parent ``grad`` buffers; broadcasting is undone by summing
over the broadcast axes.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, DimensionError
from .tensor import Tensor, as_tensor

SUPPORTED_CONV_KERNELS = (1, 3, 5)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)
    out_data = a.data + b.data

    def backward(grad):
        a._ensure_grad()
        a.grad += _unbroadcast(grad, a.data.shape)
        b._ensure_grad()
        b.grad += _unbroadcast(grad, b.data.shape)

    return Tensor(out_data, (a, b), backward)


def sub(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)
    out_data = a.data - b.data

    def backward(grad):
        a._ensure_grad()
        a.grad += _unbroadcast(grad, a.data.shape)
        b._ensure_grad()
        b.grad += _unbroadcast(-grad, b.data.shape)

    return Tensor(out_data, (a, b), backward)


def mul(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)
    out_data = a.data * b.data

    def backward(grad):
        a._ensure_grad()
        a.grad += _unbroadcast(grad * b.data, a.data.shape)
        b._ensure_grad()
        b.grad += _unbroadcast(grad * a.data, b.data.shape)

    return Tensor(out_data, (a, b), backward)


def div(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, like=a)
    out_data = a.data / b.data

    def backward(grad):
        a._ensure_grad()
        a.grad += _unbroadcast(grad / b.data, a.data.shape)
        b._ensure_grad()
        b.grad += _unbroadcast(-grad * a.data / (b.data * b.data), b.data.shape)

    return Tensor(out_data, (a, b), backward)


def neg(a: Tensor) -> Tensor:
    def backward(grad):
        a._ensure_grad()
        a.grad += -grad

    return Tensor(-a.data, (a,), backward)


def maximum(a: Tensor, floor: float) -> Tensor:
    """Elementwise max with a constant; gradient passes where a > floor."""
    mask = a.data > floor
    out_data = np.maximum(a.data, floor)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad * mask

    return Tensor(out_data, (a,), backward)


# ---------------------------------------------------------------------------
# transcendental / activations
# ---------------------------------------------------------------------------

def exp(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad * out_data

    return Tensor(out_data, (a,), backward)


def log(a: Tensor) -> Tensor:
    out_data = np.log(a.data)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad / a.data

    return Tensor(out_data, (a,), backward)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    out_data = a.data * mask

    def backward(grad):
        a._ensure_grad()
        a.grad += grad * mask

    return Tensor(out_data, (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    out_data = np.empty_like(x)
    pos = x >= 0
    out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out_data[~pos] = ex / (1.0 + ex)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad * out_data * (1.0 - out_data)

    return Tensor(out_data, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad * (1.0 - out_data * out_data)

    return Tensor(out_data, (a,), backward)


# ---------------------------------------------------------------------------
# reductions and shape manipulation
# ---------------------------------------------------------------------------

def sum_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(grad):
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a._ensure_grad()
        a.grad += np.broadcast_to(g, a.data.shape)

    return Tensor(out_data, (a,), backward)


def mean(a: Tensor, axis=None, keepdims=False) -> Tensor:
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = 1
        for ax in axes:
            count *= a.data.shape[ax]
    out = sum_(a, axis=axis, keepdims=keepdims)
    return mul(out, 1.0 / count)


def reshape(a: Tensor, shape) -> Tensor:
    out_data = a.data.reshape(shape)

    def backward(grad):
        a._ensure_grad()
        a.grad += grad.reshape(a.data.shape)

    return Tensor(out_data, (a,), backward)


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    out_data = np.ascontiguousarray(a.data.transpose(axes))
    inverse = tuple(np.argsort(axes))

    def backward(grad):
        a._ensure_grad()
        a.grad += grad.transpose(inverse)

    return Tensor(out_data, (a,), backward)


def broadcast_to(a: Tensor, shape) -> Tensor:
    out_data = np.broadcast_to(a.data, shape).copy()

    def backward(grad):
        a._ensure_grad()
        a.grad += _unbroadcast(grad, a.data.shape)

    return Tensor(out_data, (a,), backward)


def getitem(a: Tensor, idx) -> Tensor:
    out_data = a.data[idx]
    if np.isscalar(out_data) or out_data.ndim == 0:
        out_data = np.asarray(out_data)

    def backward(grad):
        a._ensure_grad()
        np.add.at(a.grad, idx, grad)

    return Tensor(out_data, (a,), backward)


def concat(tensors, axis=0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(grad):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * grad.ndim
            sl[axis] = slice(lo, hi)
            t._ensure_grad()
            t.grad += grad[tuple(sl)]

    return Tensor(out_data, tuple(tensors), backward)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError("matmul expects operands with ndim >= 2")
    out_data = np.matmul(a.data, b.data)

    def backward(grad):
        ga = np.matmul(grad, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), grad)
        a._ensure_grad()
        a.grad += _unbroadcast(ga, a.data.shape)
        b._ensure_grad()
        b.grad += _unbroadcast(gb, b.data.shape)

    return Tensor(out_data, (a, b), backward)


def dense(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map over the last axis: ``y[..., j] = sum_i x[..., i] w[i, j] + b[j]``."""
    if x.data.shape[-1] != weight.data.shape[0]:
        raise DimensionError(
            f"dense: input inner dim {x.data.shape} does not match "
            f"weight rows {weight.data.shape}")
    lead = x.data.shape[:-1]
    flat = reshape(x, (-1, x.data.shape[-1]))
    out = matmul(flat, weight)
    out = reshape(out, lead + (weight.data.shape[1],))
    if bias is not None:
        out = add(out, bias)
    return out


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup ``table[ids]`` with scatter-add backward into the table."""
    ids = np.asarray(ids, dtype=np.int64)
    out_data = table.data[ids]

    def backward(grad):
        table._ensure_grad()
        np.add.at(table.grad, ids, grad)

    return Tensor(out_data, (table,), backward)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax along ``axis`` (max-subtraction)."""
    if not -a.ndim <= axis < a.ndim:
        raise ConfigurationError(f"softmax: axis {axis} invalid for shape {a.shape}")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(grad):
        dot = (grad * out_data).sum(axis=axis, keepdims=True)
        a._ensure_grad()
        a.grad += out_data * (grad - dot)

    return Tensor(out_data, (a,), backward)


def layer_norm(a: Tensor, gain: Tensor, offset: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift.

    Zero-variance rows map to zeros (the epsilon keeps the denominator
    positive), so constant inputs yield ``offset``.
    """
    x = a.data
    d = x.shape[-1]
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv_std
    out_data = xhat * gain.data + offset.data

    def backward(grad):
        dxhat = grad * gain.data
        # standard layer-norm backward over the last axis
        dvar = (dxhat * xc).sum(axis=-1, keepdims=True) * (-0.5) * inv_std ** 3
        dmu = (-dxhat * inv_std).sum(axis=-1, keepdims=True) \
            + dvar * (-2.0 / d) * xc.sum(axis=-1, keepdims=True)
        dx = dxhat * inv_std + dvar * (2.0 / d) * xc + dmu / d
        a._ensure_grad()
        a.grad += dx
        reduce_axes = tuple(range(grad.ndim - 1))
        gain._ensure_grad()
        gain.grad += (grad * xhat).sum(axis=reduce_axes)
        offset._ensure_grad()
        offset.grad += grad.sum(axis=reduce_axes)

    return Tensor(out_data, (a, gain, offset), backward)


# ---------------------------------------------------------------------------
# convolutions
# ---------------------------------------------------------------------------

def _same_pad(n: int, k: int, stride: int) -> tuple[int, int, int]:
    out = -(-n // stride)
    total = max((out - 1) * stride + k - n, 0)
    lo = total // 2
    return out, lo, total - lo


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor | None = None,
           stride: int = 1) -> Tensor:
    """2-D convolution with "same" padding over a (..., H, W, Cin) input.

    ``kernel`` has shape (k, k, Cin, Cout); k must be 1, 3 or 5. A leading
    batch axis is optional. Output spatial dims are ceil(H/stride).
    """
    kh, kw, cin, cout = kernel.data.shape
    if kh != kw or kh not in SUPPORTED_CONV_KERNELS:
        raise ConfigurationError(
            f"conv2d: kernel size {kh}x{kw} unsupported (use 1, 3 or 5)")
    squeeze = x.ndim == 3
    if squeeze:
        x = reshape(x, (1,) + x.data.shape)
    if x.data.shape[-1] != cin:
        raise DimensionError(
            f"conv2d: input channels {x.data.shape} do not match kernel {kernel.data.shape}")

    b_, h, w, _ = x.data.shape
    ho, pt, pb = _same_pad(h, kh, stride)
    wo, pl, pr = _same_pad(w, kw, stride)
    xp = np.pad(x.data, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    # (B, Ho, Wo, kh, kw, Cin) view of sliding windows, stride applied
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]
    win = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3))
    cols = win.reshape(b_ * ho * wo, kh * kw * cin)
    wmat = kernel.data.reshape(kh * kw * cin, cout)
    out_data = (cols @ wmat).reshape(b_, ho, wo, cout)
    if bias is not None:
        out_data = out_data + bias.data

    parents = (x, kernel) if bias is None else (x, kernel, bias)

    def backward(grad):
        gmat = grad.reshape(b_ * ho * wo, cout)
        kernel._ensure_grad()
        kernel.grad += (cols.T @ gmat).reshape(kernel.data.shape)
        if bias is not None:
            bias._ensure_grad()
            bias.grad += grad.sum(axis=(0, 1, 2))
        gcols = (gmat @ wmat.T).reshape(b_, ho, wo, kh, kw, cin)
        gxp = np.zeros_like(xp)
        for di in range(kh):
            for dj in range(kw):
                gxp[:, di:di + (ho - 1) * stride + 1:stride,
                    dj:dj + (wo - 1) * stride + 1:stride] += gcols[:, :, :, di, dj]
        x._ensure_grad()
        x.grad += gxp[:, pt:pt + h, pl:pl + w]

    out = Tensor(out_data, parents, backward)
    if squeeze:
        out = reshape(out, out.data.shape[1:])
    return out


def depthwise_conv1d(x: Tensor, kernel: Tensor) -> Tensor:
    """Per-channel temporal filtering of a (..., T, D) sequence.

    ``kernel`` has shape (K, D), K odd; the sequence is replicate-padded at
    both ends so the output length equals T.
    """
    k, d = kernel.data.shape
    if k % 2 == 0:
        raise ConfigurationError(f"depthwise_conv1d: kernel size {k} must be odd")
    t = x.data.shape[-2]
    if k > t:
        raise ConfigurationError(
            f"depthwise_conv1d: kernel size {k} exceeds sequence length {t}")
    if x.data.shape[-1] != d:
        raise DimensionError(
            f"depthwise_conv1d: channels {x.data.shape} vs kernel {kernel.data.shape}")
    half = k // 2
    pad = [(0, 0)] * x.ndim
    pad[-2] = (half, half)
    xp = np.pad(x.data, pad, mode="edge")
    out_data = np.zeros_like(x.data)
    for i in range(k):
        out_data += xp[..., i:i + t, :] * kernel.data[i]

    def backward(grad):
        kernel._ensure_grad()
        gxp = np.zeros_like(xp)
        lead = tuple(range(grad.ndim - 2))
        for i in range(k):
            kernel.grad[i] += (xp[..., i:i + t, :] * grad).sum(axis=lead + (grad.ndim - 2,))
            gxp[..., i:i + t, :] += grad * kernel.data[i]
        gx = gxp[..., half:half + t, :].copy()
        # fold replicate-padding gradients back onto the edge samples
        if half:
            gx[..., 0, :] += gxp[..., :half, :].sum(axis=-2)
            gx[..., t - 1, :] += gxp[..., half + t:, :].sum(axis=-2)
        x._ensure_grad()
        x.grad += gx

    return Tensor(out_data, (x, kernel), backward)


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def _interp_axis(n_in: int, n_out: int):
    """Bilinear weights along one axis (corner-aligned; identity when sizes match)."""
    if n_out == 1 or n_in == 1:
        src = np.zeros(n_out)
    else:
        src = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    lo = np.floor(src).astype(np.int64)
    lo = np.minimum(lo, n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    w_hi = src - lo
    return lo, hi, w_hi


def bilinear_upsample(x: Tensor, out_hw: tuple[int, int]) -> Tensor:
    """Resize a (..., H, W, C) grid to ``out_hw`` by bilinear interpolation."""
    h, w = x.data.shape[-3], x.data.shape[-2]
    ho, wo = out_hw
    r_lo, r_hi, wr = _interp_axis(h, ho)
    c_lo, c_hi, wc = _interp_axis(w, wo)
    wr_ = wr.astype(x.data.dtype)[:, None, None]
    wc_ = wc.astype(x.data.dtype)[None, :, None]

    d = x.data
    top = d[..., r_lo, :, :][..., :, c_lo, :] * (1 - wc_) \
        + d[..., r_lo, :, :][..., :, c_hi, :] * wc_
    bot = d[..., r_hi, :, :][..., :, c_lo, :] * (1 - wc_) \
        + d[..., r_hi, :, :][..., :, c_hi, :] * wc_
    out_data = top * (1 - wr_) + bot * wr_

    def backward(grad):
        x._ensure_grad()
        gx = x.grad
        g_top = grad * (1 - wr_)
        g_bot = grad * wr_
        for rows, g_row in ((r_lo, g_top), (r_hi, g_bot)):
            g_lo = g_row * (1 - wc_)
            g_hi = g_row * wc_
            # scatter-add along both interpolation axes
            np.add.at(gx, (..., rows[:, None], c_lo[None, :], slice(None)), g_lo)
            np.add.at(gx, (..., rows[:, None], c_hi[None, :], slice(None)), g_hi)

    return Tensor(out_data.astype(x.data.dtype, copy=False), (x,), backward)
