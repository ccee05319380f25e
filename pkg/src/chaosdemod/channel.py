"""AWGN impairment and the SNR / Eb/N0 / processing-gain bookkeeping.

Signal power is the sample variance (mean removed) by default: the logistic
carrier sits on a large DC offset that carries no information. Pass
``power="ms"`` to use the raw mean square instead.
"""
import math
from dataclasses import dataclass

import numpy as np

from .chaos import DEFAULT_TRANSIENT, LogisticParams, generate
from .modem import BasebandSignal, ModulationConfig

POWER_CONVENTIONS = ("ac", "ms")


@dataclass(frozen=True)
class LinkBudget:
    snr_db: float
    ebn0_db: float
    spreading_db: float

    @classmethod
    def from_ebn0(cls, ebn0_db, cfg=None):
        spreading = spreading_factor_db(cfg)
        return cls(ebn0_db - spreading, ebn0_db, spreading)

    @classmethod
    def from_snr(cls, snr_db, cfg=None):
        spreading = spreading_factor_db(cfg)
        return cls(snr_db, snr_db + spreading, spreading)


def _samples(s):
    return np.asarray(s.samples if isinstance(s, BasebandSignal) else s, dtype=np.float64)


def signal_power(s, power="ac"):
    x = _samples(s)
    if x.size < 2:
        raise ValueError(f"signal power needs at least 2 samples, got {x.size}")
    if power == "ac":
        return float(np.var(x))
    if power == "ms":
        return float(np.mean(x * x))
    raise ValueError(f"unknown power convention {power!r}; expected one of {POWER_CONVENTIONS}")


def awgn(s, snr_db, g, power="ac", reference_power=None):
    """Add white Gaussian noise at ``snr_db`` relative to the measured power of ``s``.

    With ``reference_power`` the noise is scaled to that fixed power instead,
    so its level no longer depends on what ``s`` happens to carry.
    """
    x = _samples(s)
    p = signal_power(x, power) if reference_power is None else float(reference_power)
    if p <= 0.0:
        raise ValueError("signal has zero power; SNR is undefined")
    sigma = math.sqrt(p / 10.0 ** (snr_db / 10.0))
    noisy = x + sigma * g.normal(x.size)
    rate = s.sample_rate if isinstance(s, BasebandSignal) else ModulationConfig().sample_rate
    return BasebandSignal(noisy, rate)


def nominal_power(cfg=None, power="ac", n=1 << 20, transient=DEFAULT_TRANSIENT):
    """Carrier power averaged over the two keying values (equal priors)."""
    cfg = cfg or ModulationConfig()
    return float(np.mean([signal_power(generate(LogisticParams(r, 0.3), n, transient), power)
                          for r in (cfg.r_space, cfg.r_mark)]))


def spreading_factor_db(cfg=None):
    """Processing gain 10 log10(B * Tb) = 10 log10(samples_per_bit / 2)."""
    cfg = cfg or ModulationConfig()
    return 10.0 * math.log10(cfg.bandwidth * cfg.bit_duration)


def ebn0_to_snr(ebn0_db, cfg=None):
    return ebn0_db - spreading_factor_db(cfg)


def snr_to_ebn0(snr_db, cfg=None):
    return snr_db + spreading_factor_db(cfg)


def measured_snr_db(clean, noisy, power="ac"):
    """Empirical SNR of ``noisy`` against its clean source."""
    x = _samples(clean)
    noise = _samples(noisy) - x
    return 10.0 * math.log10(signal_power(x, power) / float(np.mean(noise * noise)))
