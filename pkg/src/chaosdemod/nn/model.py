"""The demodulator CNN.

    batch_normalization    (L, 1)       input standardisation
    conv1d                 (L, F)       kernel k, stride 1, same padding, ReLU
    batch_normalization_1  (L, F)
    flatten                (L * F)
    dense                  (D)          ReLU
    batch_normalization_2  (D)
    dense_1                (classes)    softmax

With the defaults (L=4096, F=128, k=16, D=64, 2 classes) this has
33,557,574 parameters, 386 of them the non-trainable moving statistics. The
kernel size is pinned by the conv parameter count: 16 * 128 + 128 = 2176.
"""
import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..rng import SeededGenerator
from . import functional as F

BN_LAYERS = ("batch_normalization", "batch_normalization_1", "batch_normalization_2")
WEIGHT_LAYERS = ("conv1d", "dense", "dense_1")
LAYER_ORDER = (
    "batch_normalization", "conv1d", "batch_normalization_1",
    "dense", "batch_normalization_2", "dense_1",
)
BN_PARAMS = ("gamma", "beta", "moving_mean", "moving_variance")
NON_TRAINABLE = ("moving_mean", "moving_variance")

# layer -> parameter count of the reference architecture
REFERENCE_COUNTS = {
    "batch_normalization": 4,
    "conv1d": 2176,
    "batch_normalization_1": 512,
    "dense": 33_554_496,
    "batch_normalization_2": 256,
    "dense_1": 130,
}
REFERENCE_TOTAL = 33_557_574
REFERENCE_TRAINABLE = 33_557_188
REFERENCE_NON_TRAINABLE = 386


@dataclass(frozen=True)
class ModelConfig:
    input_len: int = 4096
    conv_filters: int = 128
    conv_kernel: int = 16
    dense_units: int = 64
    classes: int = 2
    bn_epsilon: float = 1e-3
    bn_momentum: float = 0.99

    def __post_init__(self):
        for name in ("input_len", "conv_filters", "conv_kernel", "dense_units", "classes"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.classes < 2:
            raise ValueError("need at least two classes")
        if not self.bn_epsilon > 0 or not 0 <= self.bn_momentum < 1:
            raise ValueError("bn_epsilon must be > 0 and bn_momentum in [0, 1)")

    @property
    def flat_len(self):
        return self.input_len * self.conv_filters

    def fingerprint(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def param_shapes(self):
        """Ordered {layer/param: shape}; this order is also the weight-file order."""
        k, f, d, c = self.conv_kernel, self.conv_filters, self.dense_units, self.classes
        shapes = {}
        for layer, width in (("batch_normalization", 1),):
            shapes.update({f"{layer}/{p}": (width,) for p in BN_PARAMS})
        shapes["conv1d/kernel"] = (k, 1, f)
        shapes["conv1d/bias"] = (f,)
        shapes.update({f"batch_normalization_1/{p}": (f,) for p in BN_PARAMS})
        shapes["dense/kernel"] = (self.flat_len, d)
        shapes["dense/bias"] = (d,)
        shapes.update({f"batch_normalization_2/{p}": (d,) for p in BN_PARAMS})
        shapes["dense_1/kernel"] = (d, c)
        shapes["dense_1/bias"] = (c,)
        return shapes

    def output_shapes(self):
        return {
            "reshape": (self.input_len, 1),
            "batch_normalization": (self.input_len, 1),
            "conv1d": (self.input_len, self.conv_filters),
            "batch_normalization_1": (self.input_len, self.conv_filters),
            "flatten": (self.flat_len,),
            "dense": (self.dense_units,),
            "batch_normalization_2": (self.dense_units,),
            "dense_1": (self.classes,),
        }


def is_trainable(key):
    return key.split("/")[1] not in NON_TRAINABLE


def param_counts(cfg):
    """Per-layer, total, trainable and non-trainable counts, computed from shapes."""
    per_layer = {layer: 0 for layer in LAYER_ORDER}
    trainable = 0
    for key, shape in cfg.param_shapes().items():
        n = int(np.prod(shape))
        per_layer[key.split("/")[0]] += n
        if is_trainable(key):
            trainable += n
    total = sum(per_layer.values())
    return {"layers": per_layer, "total": total, "trainable": trainable,
            "non_trainable": total - trainable}


class Model:
    """Parameters plus the forward/backward passes of the network.

    ``params`` maps ``"layer/param"`` to an array of the model dtype. A
    train-mode forward caches what :meth:`backward` needs; only the most
    recent batch is kept.
    """

    def __init__(self, cfg, params, dtype=np.float32):
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        self.params = params
        self.bn = {
            layer: F.BatchNormState(
                params[f"{layer}/gamma"], params[f"{layer}/beta"],
                params[f"{layer}/moving_mean"], params[f"{layer}/moving_variance"],
                epsilon=cfg.bn_epsilon, momentum=cfg.bn_momentum,
            )
            for layer in BN_LAYERS
        }
        self._cache = None

    @property
    def trainable_keys(self):
        return [k for k in self.params if is_trainable(k)]

    def count_params(self):
        counts = {layer: 0 for layer in LAYER_ORDER}
        for key, arr in self.params.items():
            counts[key.split("/")[0]] += arr.size
        trainable = sum(self.params[k].size for k in self.trainable_keys)
        total = sum(counts.values())
        return {"layers": counts, "total": total, "trainable": trainable,
                "non_trainable": total - trainable}

    def copy(self):
        return Model(self.cfg, {k: v.copy() for k, v in self.params.items()}, self.dtype)

    def load_state(self, other):
        for k, v in other.params.items():
            self.params[k][...] = v

    def _check_input(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[None]
        if x.ndim != 2 or x.shape[1] != self.cfg.input_len:
            raise ValueError(
                f"expected windows of length {self.cfg.input_len}, got shape {x.shape}"
            )
        return np.ascontiguousarray(x)

    def _run(self, x, mode):
        cfg, p = self.cfg, self.params
        b = x.shape[0]
        u = F.batchnorm_forward(x.reshape(-1, 1), mode, self.bn["batch_normalization"])
        u = u.reshape(b, cfg.input_len, 1)
        cols = F.im2col(u, cfg.conv_kernel)
        z = cols @ p["conv1d/kernel"].reshape(-1, cfg.conv_filters)
        z += p["conv1d/bias"]
        y1 = F.batchnorm_forward(z, mode, self.bn["batch_normalization_1"], relu_input=True)
        flat = y1.reshape(b, cfg.flat_len)
        h = F.dense_forward(flat, p["dense/kernel"], p["dense/bias"])
        y2 = F.batchnorm_forward(h, mode, self.bn["batch_normalization_2"], relu_input=True)
        logits = F.dense_forward(y2, p["dense_1/kernel"], p["dense_1/bias"])
        return {"x": x, "batch_normalization": u, "cols": cols, "conv1d": z,
                "batch_normalization_1": y1, "flatten": flat, "dense": h,
                "batch_normalization_2": y2, "dense_1": F.softmax(logits)}

    def forward(self, x, training=False):
        """Class probabilities (float64) for a (B, input_len) batch."""
        acts = self._run(self._check_input(x), "train" if training else "infer")
        self._cache = acts if training else None
        return acts["dense_1"]

    def activations(self, x):
        """Per-layer outputs of an inference-mode pass, keyed by layer name.

        ``conv1d`` and ``dense`` are pre-activation; the ReLU is folded into
        the batch norm that follows each of them.
        """
        acts = self._run(self._check_input(x), "infer")
        b = acts["x"].shape[0]
        out = {"reshape": acts["x"].reshape(b, -1, 1)}
        for name in ("batch_normalization", "conv1d", "batch_normalization_1"):
            out[name] = acts[name].reshape(b, self.cfg.input_len, -1)
        for name in ("flatten", "dense", "batch_normalization_2", "dense_1"):
            out[name] = acts[name]
        return out

    def backward(self, onehot):
        """Gradients of the mean cross-entropy of the last train-mode batch."""
        if self._cache is None:
            raise RuntimeError("backward needs a preceding forward(..., training=True)")
        cfg, p, dt = self.cfg, self.params, self.dtype
        c = self._cache
        x, u, cols, z, flat = c["x"], c["batch_normalization"], c["cols"], c["conv1d"], c["flatten"]
        h, y2, probs = c["dense"], c["batch_normalization_2"], c["dense_1"]
        b = x.shape[0]
        onehot = np.asarray(onehot, dtype=np.float64)
        if onehot.shape != probs.shape:
            raise ValueError(f"labels {onehot.shape} do not match outputs {probs.shape}")
        g = {}
        dlogits = ((probs - onehot) / b).astype(dt)
        g["dense_1/kernel"] = y2.T @ dlogits
        g["dense_1/bias"] = dlogits.sum(axis=0, dtype=np.float64).astype(dt)
        dy2 = dlogits @ p["dense_1/kernel"].T
        dh, g["batch_normalization_2/gamma"], g["batch_normalization_2/beta"], g["dense/bias"] = \
            F.batchnorm_backward(dy2, h, self.bn["batch_normalization_2"], relu_input=True)
        g["dense/kernel"] = flat.T @ dh
        dflat = dh @ p["dense/kernel"].T
        dz, g["batch_normalization_1/gamma"], g["batch_normalization_1/beta"], g["conv1d/bias"] = \
            F.batchnorm_backward(dflat.reshape(z.shape), z, self.bn["batch_normalization_1"],
                                 relu_input=True)
        g["conv1d/kernel"] = (cols.T @ dz).reshape(p["conv1d/kernel"].shape)
        dcols = dz @ p["conv1d/kernel"].reshape(-1, cfg.conv_filters).T
        du = F.col2im(dcols, u.shape, cfg.conv_kernel)
        _, g["batch_normalization/gamma"], g["batch_normalization/beta"], _ = \
            F.batchnorm_backward(du.reshape(-1, 1), x.reshape(-1, 1),
                                 self.bn["batch_normalization"])
        return {k: g[k] for k in self.trainable_keys}

    def loss(self, x, onehot, training=False):
        return F.cross_entropy(self.forward(x, training), onehot)

    def predict(self, x, batch_size=256):
        """Softmax probabilities, inference mode, evaluated in chunks."""
        x = self._check_input(x)
        return np.concatenate([self.forward(x[i:i + batch_size])
                               for i in range(0, x.shape[0], batch_size)])

    def classify(self, x, batch_size=256):
        """Argmax class; ties go to class 0."""
        return np.argmax(self.predict(x, batch_size), axis=1)


def build_model(cfg=None, init_seed=0, dtype=np.float32):
    """Fresh model: Glorot-uniform kernels, zero biases and beta, unit gamma.

    Moving means start at 0 and moving variances at 1.
    """
    cfg = cfg or ModelConfig()
    rng = SeededGenerator(init_seed)
    params = {}
    for key, shape in cfg.param_shapes().items():
        layer, name = key.split("/")
        if name == "kernel":
            receptive = shape[0] if len(shape) == 3 else 1
            fan_in = shape[-2] * receptive
            fan_out = shape[-1] * receptive
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            stream = rng.derive_stream(WEIGHT_LAYERS.index(layer))
            arr = stream.uniform(int(np.prod(shape)), -limit, limit).astype(dtype).reshape(shape)
        elif name in ("gamma", "moving_variance"):
            arr = np.ones(shape, dtype)
        else:
            arr = np.zeros(shape, dtype)
        params[key] = arr
    model = Model(cfg, params, dtype)
    if cfg == ModelConfig():
        counts = model.count_params()
        if (counts["layers"] != REFERENCE_COUNTS or counts["total"] != REFERENCE_TOTAL
                or counts["trainable"] != REFERENCE_TRAINABLE):
            raise AssertionError(f"default architecture drifted from reference counts: {counts}")
    return model
