"""Command-line front end.

    chaosdemod bifurcation | modulate | impair | dataset | train | demod | evaluate | pipeline

Every subcommand accepts ``--config FILE.json`` whose keys mirror the long
flag names (``ebn0_db`` or ``ebn0-db``); explicit flags override the file.
Exit status: 0 success, 1 runtime or I/O error, 2 usage error.
"""
import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import __version__
from .baseline import BaselineConfig, demod_many
from .channel import awgn, ebn0_to_snr, spreading_factor_db
from .chaos import DEFAULT_TRANSIENT, bifurcation_diagram
from .dataset import (
    DatasetFormatError, SPLITS, Split, generate_dataset, load_dataset, read_split,
    save_dataset, write_split,
)
from .evaluation import confusion, format_report, metrics_dict, report
from .modem import ModulationConfig, link_parameters, modulate, parse_bits
from .nn import ModelConfig, TrainConfig, build_model, fit, load_weights, save_weights
from .nn.io import WeightsFormatError
from .rng import SeededGenerator

log = logging.getLogger("chaosdemod")


@dataclass
class ExperimentConfig:
    seed: int = 42
    r_space: float = 3.7
    r_mark: float = 3.75
    samples_per_bit: int = 4096
    sample_rate: float = 11025.0
    ebn0_db: float = 20.0
    power: str = "ac"
    calibration: str = "nominal"
    transient: int = DEFAULT_TRANSIENT
    n_train: int = 12800
    n_val: int = 3200
    n_test: int = 4000
    scale: float = 1.0
    conv_filters: int = 128
    conv_kernel: int = 16
    dense_units: int = 64
    epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-3
    patience: int = 3

    def mod_cfg(self):
        return ModulationConfig(self.r_space, self.r_mark, self.samples_per_bit, self.sample_rate)

    def model_cfg(self):
        return ModelConfig(input_len=self.samples_per_bit, conv_filters=self.conv_filters,
                           conv_kernel=self.conv_kernel, dense_units=self.dense_units)

    def sizes(self):
        return tuple(max(1, int(round(n * self.scale))) for n in (self.n_train, self.n_val, self.n_test))

    def seeds(self):
        """Dataset, weight-init and shuffle seeds derived from the master seed."""
        master = SeededGenerator(self.seed)
        return tuple(master.derive_stream(i).seed for i in range(3))

    def train_cfg(self, shuffle_seed):
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size, lr=self.lr,
                           seed=shuffle_seed, patience=self.patience)


_EXPERIMENT_KEYS = {f.name for f in fields(ExperimentConfig)}


class UsageError(Exception):
    pass


def _read_config(path):
    if not path:
        return {}
    with open(path) as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in raw.items()}


def _merge(args, dest_defaults):
    """defaults <- config file <- explicit flags (flags are parsed with default None)."""
    merged = dict(dest_defaults)
    file_cfg = _read_config(getattr(args, "config", None))
    unknown = set(file_cfg) - set(merged) - {"config"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged.update({k: v for k, v in file_cfg.items() if k in merged})
    merged.update({k: v for k, v in vars(args).items() if k in merged and v is not None})
    return merged


def _experiment(args):
    merged = _merge(args, asdict(ExperimentConfig()))
    return ExperimentConfig(**{k: merged[k] for k in _EXPERIMENT_KEYS})


def _dump_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _write_series_csv(path, values):
    f = _open_out(path)
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, v in enumerate(values):
            w.writerow([i, repr(float(v))])
    finally:
        if f is not sys.stdout:
            f.close()


def _read_series_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [c.strip() for c in rows[0]] != ["index", "value"]:
        raise ValueError(f"{path}: expected a CSV with header 'index,value'")
    return np.array([float(r[1]) for r in rows[1:]])


# -- subcommands ----------------------------------------------------------------


def cmd_bifurcation(args):
    pts = bifurcation_diagram(args.r_min, args.r_max, args.r_steps, args.transient, args.keep)
    f = _open_out(args.out)
    try:
        f.write("r,x\n")
        for r, x in pts.tolist():
            f.write(f"{r!r},{x!r}\n")
    finally:
        if f is not sys.stdout:
            f.close()
    return 0


def cmd_modulate(args):
    exp = _experiment(args)
    cfg = exp.mod_cfg()
    reseed = SeededGenerator(exp.seed) if args.reseed_per_bit else None
    sig = modulate(args.bits, cfg, x0=args.x0, transient=exp.transient, reseed_rng=reseed)
    if args.format == "chds":
        if not args.out:
            raise UsageError("--format chds needs --out")
        bits = parse_bits(args.bits)
        write_split(args.out, Split(sig.samples.reshape(len(bits), cfg.samples_per_bit), bits))
    else:
        _write_series_csv(args.out, sig.samples)
    lp = link_parameters(cfg)
    log.info("bit duration %.5f s, bit rate %.4f bit/s, bandwidth %.1f Hz, deviation %.3f%%",
             lp.bit_duration_s, lp.bit_rate_bps, lp.bandwidth_hz, lp.deviation_percent)
    return 0


def cmd_impair(args):
    exp = _experiment(args)
    cfg = exp.mod_cfg()
    snr_db = args.snr_db if args.snr_db is not None else ebn0_to_snr(args.ebn0_db, cfg)
    g = SeededGenerator(exp.seed)
    if args.input.endswith(".chds"):
        split = read_split(args.input)
        noisy = np.empty(split.windows.shape, dtype=np.float32)
        for i, w in enumerate(split.windows):
            noisy[i] = awgn(w.astype(np.float64), snr_db, g.derive_stream(i), exp.power).samples
        if not args.out:
            raise UsageError("binary input needs --out")
        write_split(args.out, Split(noisy, split.labels))
    else:
        clean = _read_series_csv(args.input)
        _write_series_csv(args.out, awgn(clean, snr_db, g, exp.power).samples)
    log.info("applied AWGN at SNR %.3f dB (Eb/N0 %.3f dB)", snr_db, snr_db + spreading_factor_db(cfg))
    return 0


def _build_dataset(exp, out_dir):
    data_seed, _, _ = exp.seeds()
    log.info("generating dataset %s at Eb/N0 %.2f dB", exp.sizes(), exp.ebn0_db)
    d = generate_dataset(exp.mod_cfg(), exp.ebn0_db, exp.sizes(), data_seed,
                         transient=exp.transient, power=exp.power, calibration=exp.calibration)
    save_dataset(d, out_dir)
    return d


def cmd_dataset(args):
    exp = _experiment(args)
    _build_dataset(exp, args.out)
    _dump_json(asdict(exp), os.path.join(args.out, "effective_config.json"))
    return 0


def _train(exp, d, weights_path, history_path):
    _, init_seed, shuffle_seed = exp.seeds()
    model = build_model(exp.model_cfg(), init_seed)
    history = fit(model, d, exp.train_cfg(shuffle_seed))
    save_weights(model, weights_path)
    if history_path:
        _dump_json(history, history_path)
    return model, history


def cmd_train(args):
    d = load_dataset(args.dataset)
    # the input length is a property of the data, not a training choice
    exp = replace(_experiment(args), samples_per_bit=d.train.window_len)
    _train(exp, d, args.out_weights, args.history_json)
    return 0


def _predict(method, split, weights=None, mod_cfg=None):
    if method == "baseline":
        cfg = mod_cfg or ModulationConfig()
        return demod_many(split.windows, BaselineConfig(cfg.r_space, cfg.r_mark))
    if not weights:
        raise UsageError("--method cnn needs --weights")
    model = weights if not isinstance(weights, str) else load_weights(weights)
    return model.classify(split.windows).astype(np.uint8)


def _dataset_mod_cfg(d):
    mc = d.meta.get("mod_cfg")
    return ModulationConfig(**mc) if mc else None


def cmd_demod(args):
    d = load_dataset(args.dataset)
    split = getattr(d, args.split)
    pred = _predict(args.method, split, args.weights, _dataset_mod_cfg(d))
    f = _open_out(args.out)
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["index", "truth", "pred"])
        for i, (t, p) in enumerate(zip(split.labels, pred)):
            w.writerow([i, int(t), int(p)])
    finally:
        if f is not sys.stdout:
            f.close()
    acc = float(np.mean(pred == split.labels))
    log.info("%s on %s: accuracy %.4f, BER %.4f", args.method, args.split, acc, 1 - acc)
    return 0


def _score(truth, pred):
    m = metrics_dict(truth, pred)
    return m, format_report(report(confusion(truth, pred)))


def cmd_evaluate(args):
    d = load_dataset(args.dataset)
    split = getattr(d, args.split)
    pred = _predict(args.method, split, args.weights, _dataset_mod_cfg(d))
    metrics, text = _score(split.labels, pred)
    metrics = {"method": args.method, "split": args.split, **metrics}
    os.makedirs(args.out_dir, exist_ok=True)
    _dump_json(metrics, os.path.join(args.out_dir, "metrics.json"))
    with open(os.path.join(args.out_dir, "report.txt"), "w") as f:
        f.write(text)
    sys.stdout.write(text)
    return 0


def cmd_pipeline(args):
    exp = _experiment(args)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    handler = logging.FileHandler(os.path.join(out, "run.log"), mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logging.getLogger().addHandler(handler)
    try:
        _dump_json(asdict(exp), os.path.join(out, "effective_config.json"))
        d = _build_dataset(exp, os.path.join(out, "dataset"))
        model, _ = _train(exp, d, os.path.join(out, "weights.chnn"), os.path.join(out, "history.json"))
        test = d.test
        cnn_metrics, cnn_text = _score(test.labels, _predict("cnn", test, model))
        base_metrics, base_text = _score(test.labels, _predict("baseline", test, mod_cfg=exp.mod_cfg()))
        _dump_json({"split": "test", "cnn": cnn_metrics, "baseline": base_metrics},
                   os.path.join(out, "metrics.json"))
        text = f"CNN demodulator\n{cnn_text}\nLeast-squares baseline\n{base_text}"
        with open(os.path.join(out, "report.txt"), "w") as f:
            f.write(text)
        sys.stdout.write(text)
        log.info("test accuracy: cnn %.4f, baseline %.4f",
                 cnn_metrics["report"]["accuracy"], base_metrics["report"]["accuracy"])
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()
    return 0


# -- parser ---------------------------------------------------------------------


def _add_experiment_flags(p, groups):
    if "signal" in groups:
        p.add_argument("--r-space", type=float)
        p.add_argument("--r-mark", type=float)
        p.add_argument("--samples-per-bit", type=int)
        p.add_argument("--sample-rate", type=float)
        p.add_argument("--transient", type=int)
    if "channel" in groups:
        p.add_argument("--power", choices=("ac", "ms"), help="signal power convention")
    if "dataset" in groups:
        p.add_argument("--calibration", choices=("nominal", "record"),
                       help="noise scaled to the nominal carrier power or to each record")
        p.add_argument("--ebn0-db", type=float)
        p.add_argument("--n-train", type=int)
        p.add_argument("--n-val", type=int)
        p.add_argument("--n-test", type=int)
        p.add_argument("--scale", type=float, help="multiply all split sizes")
    if "model" in groups:
        p.add_argument("--conv-filters", type=int)
        p.add_argument("--conv-kernel", type=int)
        p.add_argument("--dense-units", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch-size", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--patience", type=int)
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--config", help="JSON file of flag values")


def build_parser():
    parser = argparse.ArgumentParser(prog="chaosdemod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bifurcation", help="logistic-map bifurcation diagram as CSV")
    p.add_argument("--r-min", type=float, default=2.8)
    p.add_argument("--r-max", type=float, default=4.0)
    p.add_argument("--r-steps", type=int, default=1200)
    p.add_argument("--transient", type=int, default=500)
    p.add_argument("--keep", type=int, default=200)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_bifurcation)

    p = sub.add_parser("modulate", help="bits to chaotic baseband samples")
    p.add_argument("--bits", required=True, help="ASCII string of 0/1")
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--reseed-per-bit", action="store_true")
    p.add_argument("--format", choices=("csv", "chds"), default="csv")
    p.add_argument("--out")
    _add_experiment_flags(p, {"signal"})
    p.set_defaults(func=cmd_modulate)

    p = sub.add_parser("impair", help="add calibrated AWGN to a CSV signal or .chds file")
    p.add_argument("--input", required=True)
    level = p.add_mutually_exclusive_group(required=True)
    level.add_argument("--snr-db", type=float)
    level.add_argument("--ebn0-db", type=float)
    p.add_argument("--out")
    _add_experiment_flags(p, {"signal", "channel"})
    p.set_defaults(func=cmd_impair)

    p = sub.add_parser("dataset", help="generate train/val/test splits")
    p.add_argument("--out", required=True, help="output directory")
    _add_experiment_flags(p, {"signal", "channel", "dataset"})
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="train the CNN on a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-weights", required=True)
    p.add_argument("--history-json")
    _add_experiment_flags(p, {"model"})
    p.set_defaults(func=cmd_train)

    for name, func, helptext in (("demod", cmd_demod, "per-record predictions as CSV"),
                                 ("evaluate", cmd_evaluate, "classification report and metrics.json")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--dataset", required=True)
        p.add_argument("--split", choices=SPLITS, default="test")
        p.add_argument("--method", choices=("cnn", "baseline"), default="cnn")
        p.add_argument("--weights")
        if name == "demod":
            p.add_argument("--out", help="output CSV (default stdout)")
        else:
            p.add_argument("--out-dir", default=".")
        p.set_defaults(func=func)

    p = sub.add_parser("pipeline", help="dataset -> train -> evaluate, end to end")
    p.add_argument("--out-dir", default="run")
    _add_experiment_flags(p, {"signal", "channel", "dataset", "model"})
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.command == "pipeline" else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"chaosdemod: error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, DatasetFormatError, WeightsFormatError) as e:
        print(f"chaosdemod: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
