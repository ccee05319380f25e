"""Labeled single-bit window datasets and their binary storage.

Each record is an independent transmission of one bit. Record ``i`` of split
``k`` draws everything (label, x0, noise) from
``SeededGenerator(seed).derive_stream(k).derive_stream(i)``, so records can be
generated in any order and removing one leaves the others untouched.

Split file layout, little-endian::

    magic  b"CHDS"          4 bytes
    version u16 = 1
    window_len u32
    count u64
    count x (label u8, window_len x float32)

A directory holds ``train.chds``, ``val.chds``, ``test.chds`` and
``meta.json``.

Noise calibration: by default every record gets noise of the same variance,
set from the nominal carrier power (:func:`channel.nominal_power`) and the
target SNR. ``calibration="record"`` instead scales each record's noise to
that record's own measured power; since the two keying values give carriers
of different power, the noise level then reveals the label.
"""
import json
import os
import struct
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import awgn, ebn0_to_snr, nominal_power
from .chaos import DEFAULT_TRANSIENT
from .modem import ModulationConfig, modulate
from .rng import SeededGenerator, check_seed

MAGIC = b"CHDS"
VERSION = 1
HEADER = struct.Struct("<4sHIQ")
SPLITS = ("train", "val", "test")
DEFAULT_SIZES = (12800, 3200, 4000)
META_NAME = "meta.json"
CALIBRATIONS = ("nominal", "record")


class DatasetFormatError(ValueError):
    pass


class LabeledWindow(NamedTuple):
    window: np.ndarray
    label: int


@dataclass
class Split:
    windows: np.ndarray  # (n, window_len) float32
    labels: np.ndarray  # (n,) uint8

    def __post_init__(self):
        self.windows = np.ascontiguousarray(self.windows, dtype=np.float32)
        labels = np.asarray(self.labels)
        if labels.size and (labels.min() < 0 or labels.max() > 1):
            raise ValueError("labels must be 0 or 1")
        self.labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if self.windows.ndim != 2 or self.windows.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"windows {self.windows.shape} and labels {self.labels.shape} do not line up"
            )

    def __len__(self):
        return self.labels.shape[0]

    def __getitem__(self, i):
        return LabeledWindow(self.windows[i], int(self.labels[i]))

    @property
    def window_len(self):
        return self.windows.shape[1]

    def label_counts(self):
        return np.bincount(self.labels, minlength=2)


@dataclass
class DatasetSplit:
    train: Split
    val: Split
    test: Split
    meta: dict = field(default_factory=dict)

    def splits(self):
        return {name: getattr(self, name) for name in SPLITS}


def one_hot(label, classes=2):
    label = int(label)
    if not 0 <= label < classes:
        raise ValueError(f"label {label} is outside the alphabet 0..{classes - 1}")
    v = np.zeros(classes)
    v[label] = 1.0
    return v


def one_hot_batch(labels, classes=2):
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ValueError(f"labels outside the alphabet 0..{classes - 1}")
    return np.eye(classes)[labels]


def make_record(g, cfg, snr_db, transient=DEFAULT_TRANSIENT, power="ac", reference_power=None):
    """One noisy single-bit window (float64) and its label, drawn from ``g``.

    ``reference_power=None`` calibrates the noise to the record itself.
    """
    label = int(g.next_uniform() < 0.5)
    x0 = 0.01 + 0.98 * g.next_uniform()
    clean = modulate([label], cfg, x0=x0, transient=transient)
    return awgn(clean, snr_db, g, power=power, reference_power=reference_power).samples, label


def generate_split(cfg, snr_db, n, split_gen, transient=DEFAULT_TRANSIENT, power="ac",
                   reference_power=None):
    if n <= 0:
        raise ValueError(f"split size must be positive, got {n}")
    windows = np.empty((n, cfg.samples_per_bit), dtype=np.float32)
    labels = np.empty(n, dtype=np.uint8)
    for i in range(n):
        windows[i], labels[i] = make_record(split_gen.derive_stream(i), cfg, snr_db, transient,
                                            power, reference_power)
    return Split(windows, labels)


def generate_dataset(mod_cfg=None, ebn0_db=20.0, sizes=DEFAULT_SIZES, seed=0,
                     transient=DEFAULT_TRANSIENT, power="ac", calibration="nominal"):
    mod_cfg = mod_cfg or ModulationConfig()
    seed = check_seed(seed)
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 3 or min(sizes) <= 0:
        raise ValueError(f"sizes must be three positive counts, got {sizes}")
    if calibration not in CALIBRATIONS:
        raise ValueError(f"unknown calibration {calibration!r}; expected one of {CALIBRATIONS}")
    snr_db = ebn0_to_snr(ebn0_db, mod_cfg)
    ref = nominal_power(mod_cfg, power, transient=transient) if calibration == "nominal" else None
    master = SeededGenerator(seed)
    parts = [
        generate_split(mod_cfg, snr_db, n, master.derive_stream(k), transient, power, ref)
        for k, n in enumerate(sizes)
    ]
    meta = {
        "format_version": VERSION,
        "mod_cfg": asdict(mod_cfg),
        "ebn0_db": float(ebn0_db),
        "snr_db": snr_db,
        "seed": seed,
        "sizes": dict(zip(SPLITS, sizes)),
        "transient": int(transient),
        "power": power,
        "calibration": calibration,
        "reference_power": ref,
    }
    return DatasetSplit(*parts, meta=meta)


def _record_dtype(window_len):
    return np.dtype([("label", "u1"), ("window", "<f4", (window_len,))])


def split_nbytes(n, window_len):
    return HEADER.size + n * (window_len * 4 + 1)


def write_split(path, split):
    recs = np.empty(len(split), dtype=_record_dtype(split.window_len))
    recs["label"] = split.labels
    recs["window"] = split.windows
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, VERSION, split.window_len, len(split)))
        f.write(recs.tobytes())


def read_split(path, window_len=None):
    with open(path, "rb") as f:
        head = f.read(HEADER.size)
        if len(head) < HEADER.size:
            raise DatasetFormatError(f"{path}: truncated header")
        magic, version, wlen, count = HEADER.unpack(head)
        if magic != MAGIC:
            raise DatasetFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise DatasetFormatError(f"{path}: format version {version}, expected {VERSION}")
        if window_len is not None and wlen != window_len:
            raise DatasetFormatError(f"{path}: window length {wlen}, expected {window_len}")
        dt = _record_dtype(wlen)
        body = f.read()
    if len(body) != count * dt.itemsize:
        raise DatasetFormatError(
            f"{path}: truncated or oversized body ({len(body)} bytes for {count} records "
            f"of {dt.itemsize} bytes)"
        )
    recs = np.frombuffer(body, dtype=dt, count=count)
    return Split(recs["window"].copy(), recs["label"].copy())


def save_dataset(d, path):
    os.makedirs(path, exist_ok=True)
    for name, split in d.splits().items():
        write_split(os.path.join(path, f"{name}.chds"), split)
    with open(os.path.join(path, META_NAME), "w") as f:
        json.dump(d.meta, f, indent=2, sort_keys=True)
        f.write("\n")


def load_dataset(path):
    meta_path = os.path.join(path, META_NAME)
    meta = {}
    if os.path.exists(meta_path):
        with open(meta_path) as f:
            meta = json.load(f)
    window_len = meta.get("mod_cfg", {}).get("samples_per_bit")
    parts = [read_split(os.path.join(path, f"{name}.chds"), window_len) for name in SPLITS]
    return DatasetSplit(*parts, meta=meta)
