"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same inputs under every importable backend. Sizes
match the hot paths: one dataset record (4096 logistic steps plus 4096
Gaussians), and the batch-norm and Adam calls of one default training step.
"""
import argparse
import timeit

import numpy as np

from chaosdemod import kernels


def cases():
    rng = np.random.default_rng(0)
    rs = np.full(4096, 3.7)
    z = rng.normal(size=(32 * 4096, 128)).astype(np.float32)
    dy = rng.normal(size=z.shape).astype(np.float32)
    gamma = np.ones(128, np.float32)
    beta = np.zeros(128, np.float32)
    mean = z.mean(axis=0, dtype=np.float64)
    var = z.var(axis=0, dtype=np.float64)
    p = rng.normal(size=2_000_000).astype(np.float32)
    g = rng.normal(size=p.size).astype(np.float32)

    def prng_uniform(k):
        k.xoshiro_uniform(np.array([1, 2, 3, 4], np.uint64), np.empty(4096))

    def prng_normal(k):
        k.xoshiro_normal(np.array([1, 2, 3, 4], np.uint64), np.empty(4096))

    def logistic(k):
        k.logistic_orbit(k.logistic_burn(0.3, 3.7, 128), rs, np.empty(4096))

    def bn_train(k):
        k.bn_forward_train(z, gamma, beta, 1e-3, True, np.empty_like(z), np.empty(128), np.empty(128))

    def bn_back(k):
        k.bn_backward(dy, z, mean, var, gamma, 1e-3, True, np.empty_like(z),
                      np.empty(128), np.empty(128), np.empty(128))

    def adam(k):
        k.adam_update(p.copy(), g, np.zeros_like(p), np.zeros_like(p),
                      1e-3, 0.9, 0.999, 0.1, 0.001, 1e-7)

    return {
        "xoshiro_uniform x4096": prng_uniform,
        "xoshiro_normal x4096": prng_normal,
        "logistic 128+4096": logistic,
        "bn_forward_train 131072x128": bn_train,
        "bn_backward 131072x128": bn_back,
        "adam_update 2M": adam,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {name: kernels.load_backend(name) for name in kernels.available_backends()}
    names = list(backends)
    print(f"{'kernel':<30}" + "".join(f"{n + ' ms':>14}" for n in names)
          + ("    speedup" if len(names) > 1 else ""))
    for label, fn in cases().items():
        times = []
        for mod in backends.values():
            fn(mod)  # warm up
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) * 1e3)
        row = f"{label:<30}" + "".join(f"{t:14.3f}" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
