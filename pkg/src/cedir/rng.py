"""Seedable, portable random streams built on splitmix64.

Every random decision in scene generation pulls from its own child stream,
derived from (seed, label ints). The whole pipeline is 64-bit integer
arithmetic plus fixed float conversions, so identical seeds reproduce
identical scenes regardless of interpreter or platform.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 2**-53: converts the top 53 bits of a u64 into a double in [0, 1)
_U53 = 1.0 / float(1 << 53)


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive(seed: int, *keys: int) -> int:
    """Child seed for a labelled substream (one label path per decision)."""
    h = seed & _MASK
    for k in keys:
        h = _mix((h + _GOLDEN + _mix(k & _MASK)) & _MASK)
    return h


class Stream:
    """Sequential splitmix64 stream: state advances by the golden constant."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def uniform(self) -> float:
        """Double in [0, 1)."""
        return (self.next_u64() >> 11) * _U53

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi], inclusive. Modulo bias is < 2**-50 here."""
        span = hi - lo + 1
        return lo + self.next_u64() % span

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1), vectorized (same values as n uniform() calls)."""
        idx = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + idx * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GOLDEN) & _MASK
        return (z >> np.uint64(11)).astype(np.float64) * _U53

    def normals(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller (consumes 2*ceil(n/2) uniforms)."""
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]
