"""Minimal tensor layers with exact analytic backprop.

Tensors are plain numpy arrays in row-major (B, C, H, W) layout. Each layer
exposes forward(x, training) -> (y, cache) and
backward(dy, cache, need_dx) -> (dx, grads); trainable layers publish their
parameter arrays through params(). Convolutions are stride-1/no-padding and
pooling is 2x2/stride-2, which is all the adopted architecture needs.
"""

from __future__ import annotations

import numpy as np

from ..rng import RngState

__all__ = ["Conv2d", "BatchNorm", "ReLU", "MaxPool2x2", "Flatten", "Linear"]


def _uniform_init(shape, fan_in, rng: RngState, dtype):
    # uniform in [-s, s] with s = sqrt(1/fan_in), clamped to the bipolar
    # storage range (a no-op at these scales, kept for the contract)
    s = np.sqrt(1.0 / fan_in)
    w = rng.generator.uniform(-s, s, size=shape)
    return np.clip(w, -1.0, 1.0).astype(dtype)


def _window_view(x, kh, kw):
    """Strided (B, C, kh, kw, OH, OW) view of all kh x kw patches."""
    b, c, h, w = x.shape
    s0, s1, s2, s3 = x.strides
    return np.lib.stride_tricks.as_strided(
        x,
        (b, c, kh, kw, h - kh + 1, w - kw + 1),
        (s0, s1, s2, s3, s2, s3),
        writeable=False,
    )


class Conv2d:
    """Stride-1 valid convolution (cross-correlation) with bias."""

    def __init__(self, name, in_ch, out_ch, kernel, rng: RngState, dtype=np.float32):
        self.name = name
        self.kernel = kernel
        self.w = _uniform_init((out_ch, in_ch, kernel, kernel), in_ch * kernel * kernel, rng, dtype)
        self.b = np.zeros(out_ch, dtype=dtype)

    def params(self):
        return {"w": self.w, "b": self.b}

    def forward(self, x, training=False):
        cols = _window_view(x, self.kernel, self.kernel)
        y = np.tensordot(cols, self.w, axes=([1, 2, 3], [1, 2, 3]))  # (B, OH, OW, F)
        y = np.ascontiguousarray(y.transpose(0, 3, 1, 2))
        y += self.b[None, :, None, None]
        return y, x

    def backward(self, dy, cache, need_dx=True):
        x = cache
        k = self.kernel
        cols = _window_view(x, k, k)
        dw = np.tensordot(dy, cols, axes=([0, 2, 3], [0, 4, 5]))  # (F, C, kh, kw)
        db = dy.sum(axis=(0, 2, 3))
        dx = None
        if need_dx:
            # gradient w.r.t. input: full correlation with flipped kernels
            dyp = np.pad(dy, ((0, 0), (0, 0), (k - 1, k - 1), (k - 1, k - 1)))
            flipped = self.w[:, :, ::-1, ::-1]
            cols_dy = _window_view(dyp, k, k)  # (B, F, kh, kw, H, W)
            dx = np.tensordot(cols_dy, flipped, axes=([1, 2, 3], [0, 2, 3]))  # (B, H, W, C)
            dx = np.ascontiguousarray(dx.transpose(0, 3, 1, 2))
        return dx, {"w": dw.astype(self.w.dtype), "b": db.astype(self.b.dtype)}


class BatchNorm:
    """Batch normalization over (B,) or (B, H, W) per channel.

    Training mode normalizes with batch statistics and folds them into the
    running estimates (momentum 0.1); evaluation mode uses the running
    statistics only.
    """

    def __init__(self, name, channels, dtype=np.float32, momentum=0.1, eps=1e-5):
        self.name = name
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def _axes_shape(self, x):
        if x.ndim == 4:
            return (0, 2, 3), (1, -1, 1, 1)
        return (0,), (1, -1)

    def forward(self, x, training=False):
        axes, shape = self._axes_shape(x)
        if training:
            mu = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.running_mean[...] = (1 - m) * self.running_mean + m * mu
            self.running_var[...] = (1 - m) * self.running_var + m * var
        else:
            mu, var = self.running_mean, self.running_var
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu.reshape(shape)) * inv.reshape(shape)
        y = self.gamma.reshape(shape) * xhat + self.beta.reshape(shape)
        return y, (xhat, inv, axes, shape)

    def backward(self, dy, cache, need_dx=True):
        xhat, inv, axes, shape = cache
        n = dy.size // dy.shape[1]
        dgamma = (dy * xhat).sum(axis=axes)
        dbeta = dy.sum(axis=axes)
        dxhat = dy * self.gamma.reshape(shape)
        dx = (inv.reshape(shape) / n) * (
            n * dxhat
            - dxhat.sum(axis=axes, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=axes, keepdims=True)
        )
        return dx.astype(dy.dtype), {
            "gamma": dgamma.astype(self.gamma.dtype),
            "beta": dbeta.astype(self.beta.dtype),
        }


class ReLU:
    def __init__(self, name="relu"):
        self.name = name

    def forward(self, x, training=False):
        mask = x > 0
        return x * mask, mask

    def backward(self, dy, cache, need_dx=True):
        return dy * cache, {}


class MaxPool2x2:
    """2x2 max pooling with stride 2 (even spatial dims required)."""

    def __init__(self, name="pool"):
        self.name = name

    def forward(self, x, training=False):
        b, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"pooling needs even spatial dims, got {h}x{w}")
        r = (
            x.reshape(b, c, h // 2, 2, w // 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(b, c, h // 2, w // 2, 4)
        )
        idx = r.argmax(axis=-1)
        y = np.take_along_axis(r, idx[..., None], axis=-1)[..., 0]
        return y, (idx, x.shape)

    def backward(self, dy, cache, need_dx=True):
        idx, shape = cache
        b, c, h, w = shape
        dr = np.zeros((b, c, h // 2, w // 2, 4), dtype=dy.dtype)
        np.put_along_axis(dr, idx[..., None], dy[..., None], axis=-1)
        dx = (
            dr.reshape(b, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(shape)
        )
        return dx, {}


class Flatten:
    def __init__(self, name="flatten"):
        self.name = name

    def forward(self, x, training=False):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dy, cache, need_dx=True):
        return dy.reshape(cache), {}


class Linear:
    def __init__(self, name, in_features, out_features, rng: RngState, dtype=np.float32):
        self.name = name
        self.w = _uniform_init((out_features, in_features), in_features, rng, dtype)
        self.b = np.zeros(out_features, dtype=dtype)

    def params(self):
        return {"w": self.w, "b": self.b}

    def forward(self, x, training=False):
        return x @ self.w.T + self.b, x

    def backward(self, dy, cache, need_dx=True):
        x = cache
        dw = dy.T @ x
        db = dy.sum(axis=0)
        dx = dy @ self.w if need_dx else None
        return dx, {"w": dw.astype(self.w.dtype), "b": db.astype(self.b.dtype)}
