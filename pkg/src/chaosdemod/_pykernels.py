"""Pure-Python/numpy twins of the compiled kernels in ``_ckernels.pyx``.

Used when the extension is not built, or when ``CHAOSDEMOD_BACKEND=python``.
The PRNG and logistic loops are scalar Python and therefore slow; the
training kernels are vectorised numpy.
"""
import math

import numpy as np

NAME = "python"

_MASK = 0xFFFFFFFFFFFFFFFF
_TWO_PI = 6.283185307179586
_INV_2_53 = 1.0 / 9007199254740992.0


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def _draws(state, count):
    s0, s1, s2, s3 = (int(w) for w in state)
    for _ in range(count):
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        yield result
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)


def xoshiro_uniform(state, out):
    for i, word in enumerate(_draws(state, len(out))):
        out[i] = (word >> 11) * _INV_2_53


def xoshiro_normal(state, out):
    if len(out) % 2:
        raise ValueError("xoshiro_normal needs an even-length buffer")
    it = _draws(state, len(out))
    for i in range(0, len(out), 2):
        u1 = 1.0 - (next(it) >> 11) * _INV_2_53
        u2 = (next(it) >> 11) * _INV_2_53
        rad = math.sqrt(-2.0 * math.log(u1))
        out[i] = rad * math.cos(_TWO_PI * u2)
        out[i + 1] = rad * math.sin(_TWO_PI * u2)
    # exhaust the generator so the state write-back runs
    for _ in it:
        pass


def logistic_burn(x, r, n):
    x = float(x)
    r = float(r)
    for _ in range(n):
        x = r * x * (1.0 - x)
    return x


def logistic_orbit(x, r, out):
    x = float(x)
    rs = r.tolist()
    vals = [0.0] * len(rs)
    for i, ri in enumerate(rs):
        x = ri * x * (1.0 - x)
        vals[i] = x
    out[:] = vals
    return x


def adam_update(p, g, m, v, lr, beta1, beta2, bc1, bc2, eps):
    g64 = g.astype(np.float64)
    m64 = beta1 * m + (1.0 - beta1) * g64
    v64 = beta2 * v + (1.0 - beta2) * g64 * g64
    m[:] = m64
    v[:] = v64
    p[:] = p - lr * (m64 / bc1) / (np.sqrt(v64 / bc2) + eps)


def _act(z, relu):
    return np.maximum(z, 0) if relu else z


def bn_forward_train(z, gamma, beta, eps, relu, y, mean, var):
    a = _act(z, relu)
    mean[:] = a.mean(axis=0, dtype=np.float64)
    var[:] = ((a - mean) ** 2).mean(axis=0, dtype=np.float64)
    scale = gamma / np.sqrt(var + eps)
    y[:] = a * scale + (beta - mean * scale)


def bn_forward_infer(z, gamma, beta, mean, var, eps, relu, y):
    scale = gamma / np.sqrt(var + eps)
    y[:] = _act(z, relu) * scale + (beta - mean * scale)


def bn_backward(dy, z, mean, var, gamma, eps, relu, dz, dgamma, dbeta, dzsum):
    n = z.shape[0]
    invstd = 1.0 / np.sqrt(var + eps)
    xhat = (_act(z, relu) - mean) * invstd
    dbeta[:] = dy.sum(axis=0, dtype=np.float64)
    dgamma[:] = (dy * xhat).sum(axis=0, dtype=np.float64)
    g = (gamma * invstd / n) * (n * dy - dbeta - xhat * dgamma)
    if relu:
        g = np.where(z > 0, g, 0.0)
    dz[:] = g
    dzsum[:] = g.sum(axis=0)
