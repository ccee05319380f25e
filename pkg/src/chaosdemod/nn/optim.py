"""Adam with bias correction, fused per tensor in the kernel backend."""
from dataclasses import dataclass, field

import numpy as np

from .. import kernels


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params, **hyper):
        state = cls(**hyper)
        for k, p in params.items():
            state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        return state


def adam_step(params, grads, state):
    """Update ``params`` in place from ``grads``; returns ``(params, state)``.

    m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
    p <- p - lr * m_hat / (sqrt(v_hat) + eps), with m_hat, v_hat bias-corrected.
    """
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for k, g in grads.items():
        p = params[k]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {k} has shape {g.shape}, parameter has {p.shape}")
        if k not in state.m:
            state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        kernels.adam_update(
            p.reshape(-1), np.ascontiguousarray(g, dtype=p.dtype).reshape(-1),
            state.m[k].reshape(-1), state.v[k].reshape(-1),
            state.lr, state.beta1, state.beta2, bc1, bc2, state.epsilon,
        )
    return params, state
