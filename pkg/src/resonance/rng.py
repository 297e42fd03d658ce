"""Deterministic random streams: xoshiro256++ with Box-Muller normals.

Every stochastic object in this package draws from an explicit ``Rng``
rather than global state, so a run is a pure function of its seed.  The
generator is implemented in plain integer arithmetic (no platform or
library dependence), which makes streams bit-identical everywhere:
identical seed, identical sequence.

Child streams for sweep cells are derived with ``derive_seed``, a
splitmix64 chain over (base seed, cell index, run index).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_TWO53 = float(1 << 53)


def splitmix64(x: int) -> int:
    """One splitmix64 scramble of a 64-bit value."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, *parts: int) -> int:
    """Mix integer coordinates into a base seed.

    Used to give each (cell, run) of a sweep its own independent stream
    while keeping the whole sweep reproducible from one base seed.
    """
    s = splitmix64(base & _MASK64)
    for p in parts:
        s = splitmix64(s ^ splitmix64(p & _MASK64))
    return s


class Rng:
    """xoshiro256++ stream with uniform and Gaussian output.

    Normal deviates come from the Box-Muller transform applied to
    consecutive pairs of uniforms; a call for n normals always consumes
    exactly 2*ceil(n/2) raw words (any spare deviate is discarded), so
    the stream position depends only on the call sequence.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        s = self.seed
        state = []
        for _ in range(4):
            s = splitmix64(s)
            state.append(s)
        # xoshiro256++ must not start from the all-zero state
        if not any(state):
            state[0] = 0x9E3779B97F4A7C15
        self._s = state

    def u64(self) -> int:
        """Next raw 64-bit word."""
        s0, s1, s2, s3 = self._s
        r = (s0 + s3) & _MASK64
        out = ((((r << 23) & _MASK64) | (r >> 41)) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) & _MASK64) | (s3 >> 19)
        self._s = [s0, s1, s2, s3]
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1), 53-bit resolution."""
        s0, s1, s2, s3 = self._s
        out = [0.0] * n
        for i in range(n):
            r = (s0 + s3) & _MASK64
            word = ((((r << 23) & _MASK64) | (r >> 41)) + s0) & _MASK64
            out[i] = (word >> 11) * (1.0 / _TWO53)
            t = (s1 << 17) & _MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) & _MASK64) | (s3 >> 19)
        self._s = [s0, s1, s2, s3]
        return np.asarray(out)

    def uniform(self, lo: float, hi: float, shape=None) -> np.ndarray | float:
        """Uniform draws on [lo, hi)."""
        if shape is None:
            return lo + (hi - lo) * self.uniforms(1)[0]
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape))
        return (lo + (hi - lo) * self.uniforms(n)).reshape(shape)

    def normals(self, shape=None) -> np.ndarray | float:
        """Standard-normal draws via Box-Muller."""
        if shape is None:
            return self._normal_block(1)[0]
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape))
        return self._normal_block(n).reshape(shape)

    def _normal_block(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        u1 = 1.0 - u[0::2]  # in (0, 1]: keeps log() finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        return z[:n]

    def spawn(self, *parts: int) -> "Rng":
        """Independent child stream tagged by integer coordinates."""
        return Rng(derive_seed(self.seed, *parts))
