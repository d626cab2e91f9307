"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable. Every function
here has an identically named counterpart in ``_ckernels.pyx``.
"""
import math

import numpy as np

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_BLOCK = 2048


def soft_threshold(a, tau):
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - tau, 0.0)


def gaussian_kde(points, xs, h):
    p = np.asarray(points, dtype=np.float64).ravel()
    x = np.asarray(xs, dtype=np.float64).ravel()
    out = np.empty(x.size)
    # blocked to bound the (m, n) temporary
    for start in range(0, x.size, _BLOCK):
        u = (x[start:start + _BLOCK, None] - p[None, :]) / h
        out[start:start + _BLOCK] = np.exp(-0.5 * u * u).sum(axis=1)
    return out * (_INV_SQRT_2PI / (p.size * h))


def gaussian_kde_loo(points, h):
    p = np.asarray(points, dtype=np.float64).ravel()
    n = p.size
    out = np.empty(n)
    for start in range(0, n, _BLOCK):
        u = (p[start:start + _BLOCK, None] - p[None, :]) / h
        k = np.exp(-0.5 * u * u)
        # drop the self term exp(0) = 1
        out[start:start + _BLOCK] = k.sum(axis=1) - 1.0
    return out * (_INV_SQRT_2PI / ((n - 1) * h))
