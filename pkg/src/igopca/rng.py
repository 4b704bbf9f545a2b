"""Counter-based SplitMix64 generator.

Output ``i`` of a stream is ``mix64(state0 + (i + 1) * GOLDEN)`` where
``mix64`` is the SplitMix64 finalizer (xor-shift 30/27/31 with the two
Stafford multipliers).  Because every output is a pure function of its
counter, blocks of any size are produced with vectorised uint64 arithmetic
and the stream is identical to a scalar reference loop.  Doubles take the top
53 bits: ``(x >> 11) * 2**-53``.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(x):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def derive_seed(*keys):
    """Fold integer keys into one 64-bit seed, e.g. ``derive_seed(base, trial, 0)``."""
    h = 0
    for key in keys:
        h = int(mix64(np.uint64((h ^ (int(key) & _MASK)) & _MASK)))
        h = (h * 0x9E3779B97F4A7C15 + 1) & _MASK
    return h


class SplitMix64:
    """Seeded stream of 64-bit outputs; see module docstring for the algorithm."""

    def __init__(self, seed=0):
        self.seed = int(seed) & _MASK
        self._state0 = int(mix64(np.uint64(self.seed)))
        self.counter = 0

    def next_uint64(self, size):
        size = int(size)
        idx = np.arange(self.counter + 1, self.counter + 1 + size, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self._state0) + idx * GOLDEN
        self.counter += size
        return mix64(states)

    def random(self, size=None):
        """Uniform doubles in [0, 1)."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.next_uint64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        u = self.random(size)
        return low + (high - low) * u

    def integers(self, low, high, size=None):
        """Integers in [low, high) by scaling a 53-bit uniform (bias < 2**-40 for small ranges)."""
        span = int(high) - int(low)
        if span <= 0:
            raise ValueError("empty integer range")
        u = self.random(size)
        out = np.floor(np.asarray(u) * span).astype(np.int64) + int(low)
        out = np.minimum(out, int(high) - 1)
        return int(out) if size is None else out

    def normal(self, size=None):
        """Standard normals via Box-Muller (two uniforms per output)."""
        n = 1 if size is None else int(np.prod(size))
        u1 = 1.0 - self.random(n)  # (0, 1]
        u2 = self.random(n)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        if size is None:
            return float(z[0])
        return z.reshape(size)

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.integers(0, i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
