"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (collected at the end of the run by
conftest). Criteria 3 and 8 run the full default pipeline twice plus a
quarter-scale smoke run; expect well over an hour on one CPU core.
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from chaosdemod.baseline import demod_baseline, estimate_r
from chaosdemod.channel import awgn, ebn0_to_snr, measured_snr_db, spreading_factor_db
from chaosdemod.chaos import LogisticParams, generate, lyapunov_exponent
from chaosdemod.dataset import SPLITS, load_dataset, save_dataset
from chaosdemod.evaluation import report
from chaosdemod.modem import modulate
from chaosdemod.nn import ModelConfig, build_model, load_weights, save_weights
from chaosdemod.nn.model import REFERENCE_COUNTS
from chaosdemod.rng import SeededGenerator

from test_nn import max_rel_err, numeric_grads, perturbed_tiny


def run_pipeline(out_dir, *flags):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "chaosdemod", "pipeline", "--out-dir", str(out_dir), *flags],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    assert proc.returncode == 0, proc.stderr[-2000:]
    with open(os.path.join(out_dir, "metrics.json")) as f:
        metrics = json.load(f)
    return metrics, elapsed


@pytest.fixture(scope="module")
def full_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    return [(root / tag, *run_pipeline(root / tag, "--seed", "42")) for tag in ("a", "b")]


def test_criterion_1_architecture(acceptance_line):
    t0 = time.perf_counter()
    counts = build_model(ModelConfig(), 0).count_params()
    elapsed = time.perf_counter() - t0
    ok = (counts["layers"] == REFERENCE_COUNTS and counts["total"] == 33_557_574
          and counts["trainable"] == 33_557_188 and counts["non_trainable"] == 386)
    acceptance_line(1, "architecture fidelity", ok,
                    f"total {counts['total']:,}, trainable {counts['trainable']:,}, "
                    f"non-trainable {counts['non_trainable']}, layers "
                    f"{'/'.join(str(v) for v in counts['layers'].values())}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_link_budget(acceptance_line):
    sf = spreading_factor_db()
    snr = ebn0_to_snr(20.0)
    ok = abs(sf - 33.11) <= 0.01 and abs(snr + 13.11) <= 0.01
    acceptance_line(2, "link-budget closure", ok, f"spreading {sf:.4f} dB, SNR {snr:.4f} dB")
    assert ok


@pytest.mark.slow
def test_criterion_3_end_to_end(full_runs, tmp_path, acceptance_line):
    _, metrics, full_time = full_runs[0]
    acc = metrics["cnn"]["report"]["accuracy"]
    smoke, smoke_time = run_pipeline(tmp_path / "smoke", "--seed", "42", "--scale", "0.25")
    smoke_acc = smoke["cnn"]["report"]["accuracy"]
    ok_full = 0.80 <= acc <= 0.95
    ok_smoke = smoke_acc >= 0.75 and smoke_time <= 15 * 60
    acceptance_line(3, "end-to-end test accuracy", ok_full and ok_smoke,
                    f"full {acc:.4f} in [0.80, 0.95]: {ok_full}, {full_time / 60:.1f} min; "
                    f"smoke {smoke_acc:.4f} >= 0.75 in {smoke_time / 60:.1f} min <= 15: {ok_smoke}; "
                    f"baseline {metrics['baseline']['report']['accuracy']:.4f}")
    assert ok_full and ok_smoke


def test_criterion_4_gradients(acceptance_line):
    m = perturbed_tiny()
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, 8))
    y = np.eye(2)[[0, 1, 1, 0, 1]]
    m.forward(x, training=True)
    grads = m.backward(y)
    num = numeric_grads(m, x, y, h=1e-5)
    worst = max(max_rel_err(grads[k], num[k]) for k in m.trainable_keys)
    ok = set(grads) == set(m.trainable_keys) and worst < 1e-4
    acceptance_line(4, "gradient correctness", ok,
                    f"max elementwise relative error {worst:.2e} over {len(grads)} tensors")
    assert ok


def test_criterion_5_baseline_exactness(acceptance_line):
    g = SeededGenerator(5)
    worst, errors = 0.0, 0
    for i in range(1000):
        bit = i % 2
        w = modulate([bit], x0=0.01 + 0.98 * g.next_uniform()).samples
        worst = max(worst, abs(estimate_r(w) - (3.75 if bit else 3.7)))
        errors += demod_baseline(w) != bit
    ok = worst < 1e-9 and errors == 0
    acceptance_line(5, "baseline exactness", ok, f"max |r_hat - r| {worst:.1e}, BER {errors / 1000}")
    assert ok


def test_criterion_6_chaos_oracles(acceptance_line):
    fp = max(abs(generate(LogisticParams(r, 0.3), 1, transient=2000)[0] - (1 - 1 / r))
             for r in (2.0, 2.5, 2.9))
    root = math.sqrt(0.2 * 4.2)
    want = np.array([(4.2 - root) / 6.4, (4.2 + root) / 6.4])
    p2 = float(np.max(np.abs(np.sort(generate(LogisticParams(3.2, 0.3), 2, transient=1000)) - want)))
    lam4 = lyapunov_exponent(LogisticParams(4.0, 0.3))
    lam = [lyapunov_exponent(LogisticParams(r, 0.3)) for r in (3.7, 3.75)]
    ok = fp < 1e-6 and p2 < 1e-6 and abs(lam4 - math.log(2)) <= 0.01 and min(lam) > 0
    acceptance_line(6, "chaos oracles", ok,
                    f"fixed point err {fp:.1e}, period-2 err {p2:.1e}, lambda(4) {lam4:.4f}, "
                    f"lambda(3.7) {lam[0]:.4f}, lambda(3.75) {lam[1]:.4f}")
    assert ok


def test_criterion_7_channel_calibration(acceptance_line):
    clean = modulate([0, 1] * 123, x0=0.3)  # 1,007,616 samples
    noisy = awgn(clean, -13.0, SeededGenerator(7))
    got = measured_snr_db(clean, noisy)
    ok = abs(got + 13.0) <= 0.1
    acceptance_line(7, "channel calibration", ok, f"empirical SNR {got:.4f} dB over {len(clean):,} samples")
    assert ok


@pytest.mark.slow
def test_criterion_8_determinism(full_runs, tmp_path, acceptance_line):
    (a, _, _), (b, _, _) = full_runs
    names = [f"dataset/{s}.chds" for s in SPLITS] + ["dataset/meta.json", "weights.chnn", "metrics.json"]
    same = {n: (a / n).read_bytes() == (b / n).read_bytes() for n in names}
    save_dataset(load_dataset(a / "dataset"), tmp_path / "ds")
    ds_round = all((tmp_path / "ds" / f"{s}.chds").read_bytes() == (a / "dataset" / f"{s}.chds").read_bytes()
                   for s in SPLITS)
    save_weights(load_weights(a / "weights.chnn", ModelConfig()), tmp_path / "w.chnn")
    w_round = (tmp_path / "w.chnn").read_bytes() == (a / "weights.chnn").read_bytes()
    ok = all(same.values()) and ds_round and w_round
    differing = [n for n, v in same.items() if not v]
    acceptance_line(8, "determinism and persistence", ok,
                    f"identical across runs: {'all' if not differing else 'not ' + ', '.join(differing)}; "
                    f"dataset roundtrip {ds_round}, weights roundtrip {w_round}")
    assert ok


def test_criterion_9_report_arithmetic(acceptance_line):
    rep = report([[1650, 353], [100, 1897]])
    c0, c1 = rep.classes
    printed = [round(c0.precision, 2), round(c0.recall, 2), round(c1.precision, 2),
               round(c1.recall, 2), round(rep.accuracy, 2)]
    columns_ok = printed[:4] == [0.94, 0.82, 0.84, 0.95]
    accuracy_ok = printed[4] == 0.88
    p0, r0, p1, r1 = 1650 / 1750, 1650 / 2003, 1897 / 2250, 1897 / 1997
    hand = [p0, r0, 2 * p0 * r0 / (p0 + r0), p1, r1, 2 * p1 * r1 / (p1 + r1), 3547 / 4000]
    got = [c0.precision, c0.recall, c0.f1, c1.precision, c1.recall, c1.f1, rep.accuracy]
    exact_ok = max(abs(u - v) for u, v in zip(got, hand)) < 1e-12
    ok = columns_ok and accuracy_ok and exact_ok
    acceptance_line(9, "report arithmetic", ok,
                    f"precision/recall columns {printed[:4]}: {columns_ok}; accuracy "
                    f"{rep.accuracy:.5f} rounds to {printed[4]:.2f} (want 0.88): {accuracy_ok}; "
                    f"hand computation to 1e-12: {exact_ok}")
    assert ok
