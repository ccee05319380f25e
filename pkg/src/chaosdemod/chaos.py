"""Logistic-map dynamics: x[n+1] = r * x[n] * (1 - x[n])."""
from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_TRANSIENT = 128

BIFURCATION_R_MIN = 2.8
BIFURCATION_R_MAX = 4.0
BIFURCATION_STEPS = 1200
BIFURCATION_TRANSIENT = 500
BIFURCATION_KEEP = 200

LYAPUNOV_TRANSIENT = 1000


class DomainError(ValueError):
    """Argument outside the domain where the map keeps orbits in [0, 1]."""


def check_r(r):
    if not 0.0 < r <= 4.0:
        raise DomainError(f"bifurcation parameter r must lie in (0, 4], got {r}")


def check_x(x):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"state x must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class LogisticParams:
    r: float
    x0: float

    def __post_init__(self):
        check_r(self.r)
        if not 0.0 < self.x0 < 1.0:
            raise DomainError(f"initial state x0 must lie in (0, 1), got {self.x0}")


def logistic_step(x, r):
    check_x(x)
    check_r(r)
    return r * x * (1.0 - x)


def generate(params, n, transient=DEFAULT_TRANSIENT):
    """Discard ``transient`` iterates from x0, then return the next ``n`` (float64)."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if transient < 0:
        raise ValueError(f"transient must be non-negative, got {transient}")
    x = kernels.logistic_burn(params.x0, params.r, int(transient))
    out = np.empty(int(n))
    kernels.logistic_orbit(x, np.full(int(n), float(params.r)), out)
    return out


def bifurcation_diagram(
    r_min=BIFURCATION_R_MIN,
    r_max=BIFURCATION_R_MAX,
    r_steps=BIFURCATION_STEPS,
    transient=BIFURCATION_TRANSIENT,
    keep=BIFURCATION_KEEP,
    x0=0.5,
):
    """Attractor samples on a uniform r grid.

    Returns an ``(r_steps * keep, 2)`` array of ``(r, x)`` rows, grouped by
    column in increasing r. All columns are iterated together.
    """
    if not 0.0 < r_min <= r_max <= 4.0:
        raise DomainError(f"need 0 < r_min <= r_max <= 4, got [{r_min}, {r_max}]")
    if r_steps < 1 or keep < 1 or transient < 0:
        raise ValueError("r_steps and keep must be >= 1 and transient >= 0")
    rs = np.linspace(r_min, r_max, int(r_steps)) if r_steps > 1 else np.array([float(r_min)])
    x = np.full(rs.shape, float(x0))
    for _ in range(int(transient)):
        x = rs * x * (1.0 - x)
    xs = np.empty((int(keep), rs.size))
    for k in range(int(keep)):
        x = rs * x * (1.0 - x)
        xs[k] = x
    return np.column_stack([np.repeat(rs, keep), xs.T.ravel()])


def lyapunov_exponent(params, n=100_000, transient=LYAPUNOV_TRANSIENT):
    """Mean of ln|r (1 - 2 x)| along the post-transient orbit."""
    if n < 10_000:
        raise ValueError(f"need n >= 10000 iterates for a stable estimate, got {n}")
    orbit = generate(params, n, transient)
    with np.errstate(divide="ignore"):
        return float(np.mean(np.log(np.abs(params.r * (1.0 - 2.0 * orbit)))))
