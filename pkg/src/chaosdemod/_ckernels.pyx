# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every function here has a twin with the same name and signature in
``_pykernels``; the two must agree (bit-for-bit for the PRNG and the logistic
map, to rounding for the float32 training kernels).
"""
from cython cimport floating
from libc.math cimport INFINITY, cos, log, sin, sqrt
from libc.stdint cimport uint64_t

import numpy as np

NAME = "cython"

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = _rotl(s[0] + s[3], 23) + s[0]
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_uniform(uint64_t[::1] state, double[::1] out):
    """Fill ``out`` with uniforms in [0, 1) from the top 53 bits of each draw."""
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(out.shape[0]):
            out[i] = <double>(_next(s) >> 11) * INV_2_53
    for i in range(4):
        state[i] = s[i]


def xoshiro_normal(uint64_t[::1] state, double[::1] out):
    """Fill ``out`` (even length) with Box-Muller pairs."""
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    cdef double u1, u2, rad
    if out.shape[0] % 2:
        raise ValueError("xoshiro_normal needs an even-length buffer")
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(0, out.shape[0], 2):
            u1 = 1.0 - <double>(_next(s) >> 11) * INV_2_53
            u2 = <double>(_next(s) >> 11) * INV_2_53
            rad = sqrt(-2.0 * log(u1))
            out[i] = rad * cos(TWO_PI * u2)
            out[i + 1] = rad * sin(TWO_PI * u2)
    for i in range(4):
        state[i] = s[i]


def logistic_burn(double x, double r, Py_ssize_t n):
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            x = r * x * (1.0 - x)
    return x


def logistic_orbit(double x, double[::1] r, double[::1] out):
    """out[i] = r[i] * x * (1 - x), carrying x forward; returns the final state."""
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            x = r[i] * x * (1.0 - x)
            out[i] = x
    return x


def adam_update(floating[::1] p, floating[::1] g, floating[::1] m, floating[::1] v,
                double lr, double beta1, double beta2, double bc1, double bc2,
                double eps):
    """Fused Adam step.

    Uses lr * m_hat / (sqrt(v_hat) + eps) == lr_t * m / (sqrt(v) + eps_t) with
    lr_t = lr sqrt(bc2) / bc1 and eps_t = eps sqrt(bc2).
    """
    cdef Py_ssize_t i, n = p.shape[0]
    cdef floating b1 = <floating>beta1, b2 = <floating>beta2
    cdef floating c1 = <floating>(1.0 - beta1), c2 = <floating>(1.0 - beta2)
    cdef floating lr_t = <floating>(lr * sqrt(bc2) / bc1)
    cdef floating eps_t = <floating>(eps * sqrt(bc2))
    cdef floating gi, mi, vi
    cdef floating* pp = &p[0] if n else NULL
    cdef floating* gp = &g[0] if n else NULL
    cdef floating* mp = &m[0] if n else NULL
    cdef floating* vp = &v[0] if n else NULL
    with nogil:
        for i in range(n):
            gi = gp[i]
            mi = b1 * mp[i] + c1 * gi
            vi = b2 * vp[i] + c2 * gi * gi
            mp[i] = mi
            vp[i] = vi
            pp[i] = pp[i] - lr_t * mi / (sqrt(vi) + eps_t)


cdef inline double _act(double a, double floor) noexcept nogil:
    # floor is 0 for a fused ReLU, -inf otherwise; a select, so loops vectorise
    return a if a > floor else floor


def bn_forward_train(floating[:, ::1] z, floating[::1] gamma, floating[::1] beta,
                     double eps, bint relu, floating[:, ::1] y,
                     double[::1] mean, double[::1] var):
    """Per-column batch norm of relu(z) (or z); statistics accumulate in float64."""
    cdef Py_ssize_t n = z.shape[0], c = z.shape[1], i, j
    cdef double lo = 0.0 if relu else -INFINITY
    cdef double d
    cdef double[::1] scale_v = np.empty(c), shift_v = np.empty(c)
    cdef double* mu = &mean[0]
    cdef double* sq = &var[0]
    cdef double* scale = &scale_v[0]
    cdef double* shift = &shift_v[0]
    cdef floating* row
    cdef floating* out
    with nogil:
        for j in range(c):
            mu[j] = 0.0
            sq[j] = 0.0
        for i in range(n):
            row = &z[i, 0]
            for j in range(c):
                mu[j] += _act(row[j], lo)
        for j in range(c):
            mu[j] /= n
        for i in range(n):
            row = &z[i, 0]
            for j in range(c):
                d = _act(row[j], lo) - mu[j]
                sq[j] += d * d
        for j in range(c):
            sq[j] /= n
            scale[j] = gamma[j] / sqrt(sq[j] + eps)
            shift[j] = beta[j] - mu[j] * scale[j]
        for i in range(n):
            row = &z[i, 0]
            out = &y[i, 0]
            for j in range(c):
                out[j] = <floating>(_act(row[j], lo) * scale[j] + shift[j])


def bn_forward_infer(floating[:, ::1] z, floating[::1] gamma, floating[::1] beta,
                     double[::1] mean, double[::1] var, double eps, bint relu,
                     floating[:, ::1] y):
    cdef Py_ssize_t n = z.shape[0], c = z.shape[1], i, j
    cdef double lo = 0.0 if relu else -INFINITY
    cdef double[::1] scale_v = np.empty(c), shift_v = np.empty(c)
    cdef double* scale = &scale_v[0]
    cdef double* shift = &shift_v[0]
    cdef floating* row
    cdef floating* out
    with nogil:
        for j in range(c):
            scale[j] = gamma[j] / sqrt(var[j] + eps)
            shift[j] = beta[j] - mean[j] * scale[j]
        for i in range(n):
            row = &z[i, 0]
            out = &y[i, 0]
            for j in range(c):
                out[j] = <floating>(_act(row[j], lo) * scale[j] + shift[j])


def bn_backward(floating[:, ::1] dy, floating[:, ::1] z, double[::1] mean,
                double[::1] var, floating[::1] gamma, double eps, bint relu,
                floating[:, ::1] dz, double[::1] dgamma, double[::1] dbeta,
                double[::1] dzsum):
    """Backward through batch norm (and the ReLU feeding it) in train mode.

    Also accumulates the column sums of ``dz`` (the gradient of a bias added
    before the layer) in float64.
    """
    cdef Py_ssize_t n = z.shape[0], c = z.shape[1], i, j
    cdef double lo = 0.0 if relu else -INFINITY
    cdef double xhat, g
    cdef double[::1] invstd_v = np.empty(c), k_v = np.empty(c)
    cdef double[::1] a_v = np.empty(c), b_v = np.empty(c)
    cdef double* invstd = &invstd_v[0]
    cdef double* k = &k_v[0]
    cdef double* ca = &a_v[0]
    cdef double* cb = &b_v[0]
    cdef double* dg = &dgamma[0]
    cdef double* db = &dbeta[0]
    cdef double* mu = &mean[0]
    cdef double* zs = &dzsum[0]
    cdef floating* zr
    cdef floating* dyr
    cdef floating* dzr
    with nogil:
        for j in range(c):
            invstd[j] = 1.0 / sqrt(var[j] + eps)
            dg[j] = 0.0
            db[j] = 0.0
            zs[j] = 0.0
        for i in range(n):
            zr = &z[i, 0]
            dyr = &dy[i, 0]
            for j in range(c):
                xhat = (_act(zr[j], lo) - mu[j]) * invstd[j]
                db[j] += dyr[j]
                dg[j] += dyr[j] * xhat
        # dz = k * (n dy - dbeta - xhat dgamma) = ca * dy + cb + cxz * act(z)
        for j in range(c):
            k[j] = gamma[j] * invstd[j] / n
            ca[j] = k[j] * n
            cb[j] = -k[j] * (db[j] - mu[j] * invstd[j] * dg[j])
            k[j] = -k[j] * invstd[j] * dg[j]
        for i in range(n):
            zr = &z[i, 0]
            dyr = &dy[i, 0]
            dzr = &dz[i, 0]
            for j in range(c):
                g = ca[j] * dyr[j] + cb[j] + k[j] * zr[j]
                g = g if zr[j] > lo else 0.0
                dzr[j] = <floating>g
                zs[j] += g
