"""Bifurcation-parameter keying of a logistic-map carrier.

Bit 0 ("space") iterates the map at ``r_space``, bit 1 ("mark") at
``r_mark``. By default the chaotic state runs on continuously across bit
boundaries after a single burn-in at ``r_space``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chaos import DEFAULT_TRANSIENT, DomainError

CHAOTIC_ONSET = 3.57


@dataclass(frozen=True)
class ModulationConfig:
    r_space: float = 3.7
    r_mark: float = 3.75
    samples_per_bit: int = 4096
    sample_rate: float = 11025.0

    def __post_init__(self):
        if self.r_space == self.r_mark:
            raise ValueError("r_space and r_mark must differ")
        for name in ("r_space", "r_mark"):
            r = getattr(self, name)
            if not CHAOTIC_ONSET < r <= 4.0:
                raise DomainError(f"{name}={r} is outside the chaotic regime ({CHAOTIC_ONSET}, 4]")
        if int(self.samples_per_bit) != self.samples_per_bit or self.samples_per_bit < 1:
            raise ValueError(f"samples_per_bit must be a positive integer, got {self.samples_per_bit}")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def bit_duration(self):
        return self.samples_per_bit / self.sample_rate

    @property
    def bandwidth(self):
        return self.sample_rate / 2.0

    def r_for(self, bit):
        return self.r_mark if bit else self.r_space


@dataclass
class BasebandSignal:
    samples: np.ndarray
    sample_rate: float

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class LinkParameters:
    bit_duration_s: float
    bit_rate_bps: float
    bandwidth_hz: float
    deviation_percent: float


def parse_bits(bits):
    """Accept a 0/1 string or an iterable of 0/1 ints; return a uint8 array."""
    if isinstance(bits, str):
        bits = bits.strip()
        bad = set(bits) - {"0", "1"}
        if bad:
            raise ValueError(f"invalid bit symbols {sorted(bad)}; only '0' and '1' are allowed")
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if arr.ndim != 1 or not np.isin(arr, (0, 1)).all():
        raise ValueError("bits must be a 1-D sequence over {0, 1}")
    return arr.astype(np.uint8)


def modulate(bits, cfg=None, x0=0.3, transient=DEFAULT_TRANSIENT, reseed_rng=None):
    """Map ``bits`` to a chaotic baseband waveform.

    With ``reseed_rng`` (a SeededGenerator), each bit instead starts from a
    fresh x0 drawn uniformly in (0.01, 0.99) and burned in at that bit's r.
    """
    cfg = cfg or ModulationConfig()
    bits = parse_bits(bits)
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (0, 1), got {x0}")
    spb = int(cfg.samples_per_bit)
    rs = np.where(bits == 1, cfg.r_mark, cfg.r_space).astype(np.float64)
    out = np.empty(bits.size * spb)
    if reseed_rng is None:
        x = kernels.logistic_burn(float(x0), cfg.r_space, int(transient))
        kernels.logistic_orbit(x, np.repeat(rs, spb), out)
    else:
        seeds = reseed_rng.uniform(bits.size, 0.01, 0.99)
        for k, r in enumerate(rs):
            x = kernels.logistic_burn(float(seeds[k]), float(r), int(transient))
            kernels.logistic_orbit(x, np.full(spb, r), out[k * spb:(k + 1) * spb])
    return BasebandSignal(out, cfg.sample_rate)


def link_parameters(cfg=None):
    cfg = cfg or ModulationConfig()
    duration = cfg.bit_duration
    midpoint = (cfg.r_mark + cfg.r_space) / 2.0
    return LinkParameters(
        bit_duration_s=duration,
        bit_rate_bps=1.0 / duration,
        bandwidth_hz=cfg.bandwidth,
        deviation_percent=100.0 * (cfg.r_mark - cfg.r_space) / midpoint,
    )
