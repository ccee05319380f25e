"""Stateless layer math on numpy arrays (channels-last, row-major)."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .. import kernels

CLAMP_MIN = 1e-12


def same_padding(k):
    """(left, right) zero padding that keeps length for stride 1."""
    left = (k - 1) // 2
    return left, k - 1 - left


def _as_batch(x):
    x = np.asarray(x)
    if x.ndim == 2:
        return x[None], True
    if x.ndim != 3:
        raise ValueError(f"conv1d expects (L, C) or (B, L, C) input, got shape {x.shape}")
    return x, False


def im2col(x, k):
    """(B, L, C) -> (B * L, k * C) patches for a "same", stride-1 convolution."""
    b, length, c = x.shape
    left, right = same_padding(k)
    xp = np.pad(x, ((0, 0), (left, right), (0, 0)))
    windows = sliding_window_view(xp, k, axis=1)  # (B, L, C, k)
    return np.ascontiguousarray(windows.transpose(0, 1, 3, 2)).reshape(b * length, k * c)


def col2im(dcols, shape, k):
    """Adjoint of :func:`im2col`."""
    b, length, c = shape
    left, _ = same_padding(k)
    d = dcols.reshape(b, length, k, c)
    dxp = np.zeros((b, length + k - 1, c), dtype=dcols.dtype)
    for j in range(k):
        dxp[:, j:j + length, :] += d[:, :, j, :]
    return dxp[:, left:left + length, :]


def conv1d_forward(x, w, b):
    """y[t, f] = b[f] + sum_j,c w[j, c, f] * x[t + j - (k-1)//2, c], zero padded.

    ``x`` is (L, C) or (B, L, C); ``w`` is (k, C, F).
    """
    xb, single = _as_batch(x)
    k, c, f = w.shape
    if xb.shape[2] != c or b.shape != (f,):
        raise ValueError(f"shape mismatch: x {xb.shape}, w {w.shape}, b {b.shape}")
    y = (im2col(xb, k) @ w.reshape(k * c, f) + b).reshape(xb.shape[0], xb.shape[1], f)
    return y[0] if single else y


def conv1d_backward(dy, x, w):
    """Gradients (dx, dw, db) of a conv1d_forward call."""
    xb, single = _as_batch(x)
    dyb = dy[None] if single else dy
    k, c, f = w.shape
    dy2 = dyb.reshape(-1, f)
    dw = (im2col(xb, k).T @ dy2).reshape(k, c, f)
    db = dy2.sum(axis=0, dtype=np.float64).astype(dy.dtype)
    dx = col2im(dy2 @ w.reshape(k * c, f).T, xb.shape, k)
    return (dx[0] if single else dx), dw, db


def dense_forward(x, w, b):
    if x.shape[-1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ValueError(f"shape mismatch: x {x.shape}, w {w.shape}, b {b.shape}")
    return x @ w + b


def relu(x):
    return np.maximum(x, 0)


def softmax(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("softmax input must be finite")
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(p, onehot):
    """Mean over rows of -sum(y * ln p), with p clamped to [1e-12, 1]."""
    p = np.asarray(p, dtype=np.float64)
    onehot = np.asarray(onehot, dtype=np.float64)
    if p.shape != onehot.shape:
        raise ValueError(f"shape mismatch: p {p.shape}, labels {onehot.shape}")
    per_row = -(onehot * np.log(np.clip(p, CLAMP_MIN, 1.0))).sum(axis=-1)
    return float(np.mean(per_row))


class BatchNormState:
    """Per-channel scale/shift and moving statistics of one batch-norm layer."""

    def __init__(self, gamma, beta, moving_mean, moving_var, epsilon=1e-3, momentum=0.99):
        self.gamma = gamma
        self.beta = beta
        self.moving_mean = moving_mean
        self.moving_var = moving_var
        self.epsilon = epsilon
        self.momentum = momentum
        self.batch_mean = None
        self.batch_var = None

    @classmethod
    def fresh(cls, channels, dtype=np.float64, **kw):
        return cls(np.ones(channels, dtype), np.zeros(channels, dtype),
                   np.zeros(channels, dtype), np.ones(channels, dtype), **kw)


def batchnorm_forward(x, mode, state, relu_input=False):
    """Batch norm over every axis but the last (channels).

    ``train`` normalises with batch statistics and folds them into the moving
    averages; ``infer`` uses the moving averages. With ``relu_input`` the
    ReLU that precedes the layer is applied on the fly.
    """
    x = np.ascontiguousarray(x)
    c = x.shape[-1]
    x2 = x.reshape(-1, c)
    if x2.shape[0] == 0:
        raise ValueError("batch norm over an empty batch")
    y = np.empty_like(x2)
    if mode == "train":
        mean = np.empty(c)
        var = np.empty(c)
        kernels.bn_forward_train(x2, state.gamma, state.beta, state.epsilon, relu_input, y, mean, var)
        state.batch_mean, state.batch_var = mean, var
        m = state.momentum
        state.moving_mean[:] = m * state.moving_mean + (1.0 - m) * mean
        state.moving_var[:] = m * state.moving_var + (1.0 - m) * var
    elif mode == "infer":
        kernels.bn_forward_infer(
            x2, state.gamma, state.beta,
            state.moving_mean.astype(np.float64), state.moving_var.astype(np.float64),
            state.epsilon, relu_input, y,
        )
    else:
        raise ValueError(f"unknown batch-norm mode {mode!r}")
    return y.reshape(x.shape)


def batchnorm_backward(dy, x, state, relu_input=False):
    """(dx, dgamma, dbeta, dx column sums) for the last train-mode forward on ``x``."""
    if state.batch_mean is None:
        raise RuntimeError("batch-norm backward needs a preceding train-mode forward")
    c = x.shape[-1]
    x2 = np.ascontiguousarray(x).reshape(-1, c)
    dy2 = np.ascontiguousarray(dy, dtype=x2.dtype).reshape(-1, c)
    dx = np.empty_like(x2)
    dgamma = np.empty(c)
    dbeta = np.empty(c)
    dxsum = np.empty(c)
    kernels.bn_backward(dy2, x2, state.batch_mean, state.batch_var, state.gamma,
                        state.epsilon, relu_input, dx, dgamma, dbeta, dxsum)
    dt = x2.dtype
    return dx.reshape(x.shape), dgamma.astype(dt), dbeta.astype(dt), dxsum.astype(dt)
