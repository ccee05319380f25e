"""Seedable xoshiro256++ generator with Box-Muller Gaussians.

State is seeded by running splitmix64 from the 64-bit seed, as recommended by
the xoshiro authors. ``derive_stream(i)`` hashes ``(seed, i)`` through the
splitmix64 finaliser to obtain an independent child seed, so per-record
streams do not depend on how many draws other records made.

Uniforms use the top 53 bits of each output: ``(w >> 11) * 2**-53``.
Gaussians come in Box-Muller pairs ``sqrt(-2 ln(1-u1)) * (cos, sin)(2 pi u2)``;
the second member of a pair is held back for the next call.
"""
import numpy as np

from . import kernels

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x):
    """One splitmix64 step: returns ``(next_state, output)``."""
    x = (x + GOLDEN_GAMMA) & MASK64
    return x, _mix64(x)


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


class SeededGenerator:
    """Single-consumer random source. Not safe to share between threads."""

    def __init__(self, seed):
        self.seed = check_seed(seed)
        words = []
        x = self.seed
        for _ in range(4):
            x, out = splitmix64(x)
            words.append(out)
        self.state = np.array(words, dtype=np.uint64)
        self._spare = None

    def __repr__(self):
        return f"SeededGenerator(seed={self.seed})"

    def derive_stream(self, index):
        """Child generator for ``index``; depends only on (seed, index)."""
        index = int(index)
        if index < 0:
            raise ValueError("stream index must be non-negative")
        key = _mix64(((index + 1) * GOLDEN_GAMMA) & MASK64)
        return SeededGenerator(_mix64(self.seed ^ key))

    def next_uniform(self):
        out = np.empty(1)
        kernels.xoshiro_uniform(self.state, out)
        return float(out[0])

    def next_gaussian(self):
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        pair = np.empty(2)
        kernels.xoshiro_normal(self.state, pair)
        self._spare = float(pair[1])
        return float(pair[0])

    def uniform(self, size, low=0.0, high=1.0):
        """``size`` uniforms in [low, high); same sequence as repeated next_uniform."""
        out = np.empty(int(size))
        kernels.xoshiro_uniform(self.state, out)
        if low != 0.0 or high != 1.0:
            out = low + (high - low) * out
        return out

    def normal(self, size):
        """``size`` standard normals; same sequence as repeated next_gaussian."""
        size = int(size)
        out = np.empty(size)
        start = 0
        if size and self._spare is not None:
            out[0] = self._spare
            self._spare = None
            start = 1
        rest = size - start
        if rest:
            buf = np.empty(rest + rest % 2)
            kernels.xoshiro_normal(self.state, buf)
            out[start:] = buf[:rest]
            if rest % 2:
                self._spare = float(buf[-1])
        return out

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = np.arange(n)
        u = self.uniform(max(n - 1, 0))
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[k] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm
