"""Weight files.

Layout, little-endian::

    magic b"CHNN"       4 bytes
    version u16 = 1
    fingerprint         16 ASCII hex chars (ModelConfig.fingerprint())
    config_len u32, config JSON (config_len bytes)
    value_count u64
    value_count x float32, parameter blocks in ModelConfig.param_shapes() order
"""
import json
import struct
from dataclasses import asdict

import numpy as np

from .model import Model, ModelConfig

MAGIC = b"CHNN"
VERSION = 1
_HEAD = struct.Struct("<4sH16sI")
_COUNT = struct.Struct("<Q")


class WeightsFormatError(ValueError):
    pass


def save_weights(model, path):
    cfg_blob = json.dumps(asdict(model.cfg), sort_keys=True).encode()
    shapes = model.cfg.param_shapes()
    total = sum(int(np.prod(s)) for s in shapes.values())
    with open(path, "wb") as f:
        f.write(_HEAD.pack(MAGIC, VERSION, model.cfg.fingerprint().encode(), len(cfg_blob)))
        f.write(cfg_blob)
        f.write(_COUNT.pack(total))
        for key in shapes:
            f.write(np.ascontiguousarray(model.params[key], dtype="<f4").tobytes())


def load_weights(path, cfg=None, dtype=np.float32):
    """Read a weight file. With ``cfg``, its fingerprint must match the file's."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEAD.size:
        raise WeightsFormatError(f"{path}: truncated header")
    magic, version, fp, cfg_len = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise WeightsFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise WeightsFormatError(f"{path}: format version {version}, expected {VERSION}")
    fp = fp.decode("ascii")
    pos = _HEAD.size
    file_cfg = ModelConfig(**json.loads(data[pos:pos + cfg_len]))
    pos += cfg_len
    if file_cfg.fingerprint() != fp:
        raise WeightsFormatError(f"{path}: header fingerprint {fp} does not match its config")
    if cfg is not None and cfg.fingerprint() != fp:
        raise WeightsFormatError(
            f"{path}: architecture fingerprint {fp} does not match requested {cfg.fingerprint()}"
        )
    (count,) = _COUNT.unpack_from(data, pos)
    pos += _COUNT.size
    if len(data) - pos != 4 * count:
        raise WeightsFormatError(
            f"{path}: expected {count} float32 values, found {(len(data) - pos) / 4:g}"
        )
    values = np.frombuffer(data, dtype="<f4", count=count, offset=pos)
    params, off = {}, 0
    for key, shape in file_cfg.param_shapes().items():
        n = int(np.prod(shape))
        params[key] = values[off:off + n].astype(dtype).reshape(shape)
        off += n
    if off != count:
        raise WeightsFormatError(f"{path}: value count {count} does not match the architecture ({off})")
    return Model(file_cfg, params, dtype)
