import csv
import json

import numpy as np
import pytest

from chaosdemod.cli import ExperimentConfig, main
from chaosdemod.dataset import read_split

TINY_FLAGS = [
    "--samples-per-bit", "64", "--n-train", "64", "--n-val", "32", "--n-test", "32",
    "--conv-filters", "2", "--dense-units", "4", "--epochs", "2",
]


def rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_bifurcation_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bifurcation", "--r-min", "2.9", "--r-max", "3.9", "--r-steps", "11",
                 "--keep", "32", "--transient", "2000", "--out", str(out)]) == 0
    data = rows(out)
    assert data[0] == ["r", "x"] and len(data) == 1 + 11 * 32
    pts = np.array(data[1:], dtype=float)
    branches = {round(r, 6): len(np.unique(np.round(pts[np.isclose(pts[:, 0], r), 1], 6)))
                for r in np.unique(pts[:, 0])}
    assert branches[2.9] == 1 and branches[3.2] == 2 and branches[3.5] == 4
    assert branches[3.9] > 16


def test_modulate_csv_and_chds(tmp_path):
    assert main(["modulate", "--bits", "0110", "--samples-per-bit", "32",
                 "--out", str(tmp_path / "s.csv")]) == 0
    data = rows(tmp_path / "s.csv")
    assert data[0] == ["index", "value"] and len(data) == 1 + 4 * 32
    assert main(["modulate", "--bits", "0110", "--samples-per-bit", "32", "--format", "chds",
                 "--out", str(tmp_path / "s.chds")]) == 0
    split = read_split(tmp_path / "s.chds")
    assert split.labels.tolist() == [0, 1, 1, 0] and split.windows.shape == (4, 32)
    assert main(["modulate", "--bits", "01", "--samples-per-bit", "8", "--reseed-per-bit",
                 "--out", str(tmp_path / "r.csv")]) == 0


def test_impair_csv(tmp_path):
    main(["modulate", "--bits", "01", "--samples-per-bit", "512", "--out", str(tmp_path / "s.csv")])
    assert main(["impair", "--input", str(tmp_path / "s.csv"), "--snr-db", "10",
                 "--out", str(tmp_path / "n.csv")]) == 0
    clean = np.array(rows(tmp_path / "s.csv")[1:], dtype=float)[:, 1]
    noisy = np.array(rows(tmp_path / "n.csv")[1:], dtype=float)[:, 1]
    assert 10 * np.log10(clean.var() / np.mean((noisy - clean) ** 2)) == pytest.approx(10, abs=0.5)


def test_impair_chds(tmp_path):
    main(["modulate", "--bits", "0101", "--samples-per-bit", "64", "--format", "chds",
          "--out", str(tmp_path / "s.chds")])
    assert main(["impair", "--input", str(tmp_path / "s.chds"), "--ebn0-db", "20",
                 "--samples-per-bit", "64", "--out", str(tmp_path / "n.chds")]) == 0
    assert read_split(tmp_path / "n.chds").labels.tolist() == [0, 1, 0, 1]


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["impair", "--input", "x.csv", "--snr-db", "1", "--ebn0-db", "2"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["modulate", "--bits", "01", "--no-such-flag"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2
    assert main(["modulate", "--bits", "01", "--format", "chds"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"not_a_key": 1}))
    assert main(["dataset", "--out", str(tmp_path / "d"), "--config", str(cfg)]) == 2
    assert "not_a_key" in capsys.readouterr().err


def test_runtime_errors_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope"
    assert main(["evaluate", "--dataset", str(missing), "--method", "baseline"]) == 1
    assert str(missing) in capsys.readouterr().err
    assert main(["modulate", "--bits", "0120"]) == 1
    assert main(["modulate", "--bits", "01", "--r-space", "3.2"]) == 1


def test_config_merging(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"samples-per-bit": 64, "n_train": 6, "n_val": 4, "n_test": 4,
                               "ebn0_db": 10.0}))
    out = tmp_path / "d"
    assert main(["dataset", "--out", str(out), "--config", str(cfg), "--ebn0-db", "15"]) == 0
    eff = json.loads((out / "effective_config.json").read_text())
    assert eff["samples_per_bit"] == 64 and eff["n_train"] == 6
    assert eff["ebn0_db"] == 15.0  # the flag beats the file
    assert eff["seed"] == ExperimentConfig().seed
    assert json.loads((out / "meta.json").read_text())["ebn0_db"] == 15.0


def test_seeds_are_derived_from_master():
    a, b = ExperimentConfig(seed=1), ExperimentConfig(seed=2)
    assert len(set(a.seeds())) == 3
    assert a.seeds() != b.seeds() and a.seeds() == ExperimentConfig(seed=1).seeds()
    assert ExperimentConfig(scale=0.25).sizes() == (3200, 800, 1000)


def test_stepwise_commands(tmp_path, capsys):
    d = tmp_path / "d"
    assert main(["dataset", "--out", str(d)] + TINY_FLAGS[:8]) == 0
    w = tmp_path / "w.chnn"
    assert main(["train", "--dataset", str(d), "--out-weights", str(w), "--history-json",
                 str(tmp_path / "h.json")] + TINY_FLAGS[8:]) == 0
    assert len(json.loads((tmp_path / "h.json").read_text())["epoch"]) == 2
    assert main(["demod", "--dataset", str(d), "--weights", str(w), "--out", str(tmp_path / "p.csv")]) == 0
    pred = rows(tmp_path / "p.csv")
    assert pred[0] == ["index", "truth", "pred"] and len(pred) == 33
    assert main(["evaluate", "--dataset", str(d), "--method", "baseline", "--split", "val",
                 "--out-dir", str(tmp_path / "e")]) == 0
    metrics = json.loads((tmp_path / "e" / "metrics.json").read_text())
    assert metrics["split"] == "val" and sum(map(sum, metrics["confusion"])) == 32
    assert "Accuracy" in capsys.readouterr().out
    assert main(["demod", "--dataset", str(d)]) == 2


def test_pipeline_is_reproducible(tmp_path):
    for sub in ("a", "b"):
        assert main(["pipeline", "--out-dir", str(tmp_path / sub), "--seed", "7"] + TINY_FLAGS) == 0
    for name in ("metrics.json", "weights.chnn", "history.json", "report.txt", "effective_config.json",
                 "dataset/train.chds", "dataset/val.chds", "dataset/test.chds", "dataset/meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    metrics = json.loads((tmp_path / "a" / "metrics.json").read_text())
    assert set(metrics) == {"split", "cnn", "baseline"}
    assert (tmp_path / "a" / "run.log").exists()
    assert main(["pipeline", "--out-dir", str(tmp_path / "c"), "--seed", "8"] + TINY_FLAGS) == 0
    assert (tmp_path / "c" / "dataset/test.chds").read_bytes() != (tmp_path / "a" / "dataset/test.chds").read_bytes()
