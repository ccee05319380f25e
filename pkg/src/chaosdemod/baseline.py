"""Least-squares estimate of r from a window, then nearest-symbol decision.

Regressing x[n+1] on x[n](1 - x[n]) gives

    r_hat = sum x[n+1] x[n](1 - x[n]) / sum (x[n](1 - x[n]))**2

which is exact on noiseless data. Under AWGN the regressor is itself noisy,
so the estimate is biased; this demodulator is a reference point that assumes
both keying values are known.
"""
from dataclasses import dataclass

import numpy as np

CLAMP = (-0.5, 1.5)


class DegenerateWindowError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    r_space: float = 3.7
    r_mark: float = 3.75

    def __post_init__(self):
        if self.r_space == self.r_mark:
            raise ValueError("r_space and r_mark must differ")


def estimate_r(window, clamp=CLAMP):
    x = np.asarray(window, dtype=np.float64)
    if x.size < 2:
        raise DegenerateWindowError(f"need at least 2 samples, got {x.size}")
    if clamp is not None:
        x = np.clip(x, *clamp)
    q = x[:-1] * (1.0 - x[:-1])
    den = float(np.dot(q, q))
    if den <= 0.0:
        raise DegenerateWindowError("sum of (x(1-x))^2 is zero; the window carries no information about r")
    return float(np.dot(x[1:], q)) / den


def decide(r_hat, cfg):
    """Label whose r is nearest to ``r_hat``; an exact tie goes to 0."""
    d_space = abs(r_hat - cfg.r_space)
    d_mark = abs(r_hat - cfg.r_mark)
    return 1 if d_mark < d_space else 0


def demod_baseline(window, cfg=None):
    cfg = cfg or BaselineConfig()
    return decide(estimate_r(window), cfg)


def demod_many(windows, cfg=None):
    cfg = cfg or BaselineConfig()
    return np.array([demod_baseline(w, cfg) for w in windows], dtype=np.uint8)
