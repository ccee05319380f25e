"""Backend selection for the hot loops.

The compiled extension is preferred. Set ``CHAOSDEMOD_BACKEND=python`` to
force the pure-Python fallback, or ``=cython`` to make a missing extension an
import error instead of a silent fallback.
"""
import importlib
import os

from . import _pykernels

BACKENDS = ("cython", "python")


def load_backend(name):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("chaosdemod._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}; expected one of {BACKENDS}")


def available_backends():
    found = []
    for name in BACKENDS:
        try:
            load_backend(name)
        except ImportError:
            continue
        found.append(name)
    return found


_requested = os.environ.get("CHAOSDEMOD_BACKEND", "").strip().lower()
if _requested:
    impl = load_backend(_requested)
else:
    try:
        impl = load_backend("cython")
    except ImportError:
        impl = _pykernels

BACKEND = impl.NAME

xoshiro_uniform = impl.xoshiro_uniform
xoshiro_normal = impl.xoshiro_normal
logistic_burn = impl.logistic_burn
logistic_orbit = impl.logistic_orbit
adam_update = impl.adam_update
bn_forward_train = impl.bn_forward_train
bn_forward_infer = impl.bn_forward_infer
bn_backward = impl.bn_backward
