import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaosdemod.baseline import (
    BaselineConfig, DegenerateWindowError, decide, demod_baseline, demod_many, estimate_r,
)
from chaosdemod.channel import awgn
from chaosdemod.modem import modulate
from chaosdemod.rng import SeededGenerator


def test_exact_on_noiseless_windows():
    g = SeededGenerator(0)
    for bit, r in ((0, 3.7), (1, 3.75)):
        for x0 in g.uniform(50, 0.01, 0.99):
            w = modulate([bit], x0=float(x0)).samples
            assert abs(estimate_r(w) - r) < 1e-9
            assert demod_baseline(w) == bit


@given(st.floats(3.6, 4.0), st.floats(0.05, 0.95))
@settings(max_examples=30, deadline=None)
def test_recovers_any_chaotic_r(r, x0):
    x = [x0]
    for _ in range(200):
        x.append(r * x[-1] * (1 - x[-1]))
    assert estimate_r(np.array(x)) == pytest.approx(r, abs=1e-9)


def test_degenerate_windows():
    with pytest.raises(DegenerateWindowError):
        estimate_r(np.zeros(4096))
    with pytest.raises(DegenerateWindowError):
        estimate_r([0.4])
    with pytest.raises(DegenerateWindowError):
        estimate_r(np.ones(10))


def test_tie_and_symmetry():
    cfg = BaselineConfig()
    assert decide(3.725, cfg) == 0
    assert decide(3.7251, cfg) == 1 and decide(3.7249, cfg) == 0
    swapped = BaselineConfig(r_space=3.75, r_mark=3.7)
    for r in np.linspace(3.6, 3.85, 51):
        if r != 3.725:
            assert decide(r, swapped) == 1 - decide(r, cfg)
    with pytest.raises(ValueError):
        BaselineConfig(3.7, 3.7)


def test_noise_degrades_estimate():
    g = SeededGenerator(1)
    clean = [modulate([1], x0=float(x0)) for x0 in g.uniform(100, 0.01, 0.99)]
    errs = {}
    for snr in (10.0, -13.0):
        errs[snr] = np.mean([abs(estimate_r(awgn(c, snr, g).samples) - 3.75) for c in clean])
    assert errs[-13.0] > errs[10.0]


def test_demod_many():
    ws = [modulate([b], x0=0.4).samples for b in (0, 1, 1)]
    assert demod_many(ws).tolist() == [0, 1, 1]
