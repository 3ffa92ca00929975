"""Deterministic, platform-independent random streams (splitmix64).

Everything stochastic in the package (noise injection, Monte-Carlo
frequency draws) is driven by splitmix64 with the standard
0x9E3779B97F4A7C15 increment.  The generator works on 64-bit integers
only, so identical seeds give byte-identical results on every platform.

Structured keys (sample index, trial index, ...) get their own streams:
``substream(seed, k)`` folds the key into the base seed through the
splitmix64 output mix, and the stream then yields consecutive outputs.
"""

from __future__ import annotations

import gmpy2

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """The reference splitmix64 sequence for a 64-bit seed."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)


def substream(seed: int, *key: int) -> SplitMix64:
    """Independent stream for a structured key under a base seed.

    Each key component k is folded in as state = mix(state + (k+1)*GOLDEN),
    so (seed, 0) and (seed, 1) streams share no obvious structure.
    """
    state = seed & _MASK
    for k in key:
        state = _mix((state + ((k + 1) * _GOLDEN)) & _MASK)
    return SplitMix64(state)


def noise_component(seed: int, sample_index: int, imag: bool) -> int:
    """The single u64 draw for one noise component.

    One stream per (seed, sample-index, re/im) triple; the draw is that
    stream's first output.
    """
    return substream(seed, sample_index, 1 if imag else 0).next_u64()


def u64_to_symmetric_unit(u: int) -> gmpy2.mpfr:
    """Map a u64 draw to (-1, 1) as 2*(u/2^64 - 1/2), exactly representable."""
    return (gmpy2.mpfr(u) / gmpy2.mpfr(1 << 64) - gmpy2.mpfr("0.5")) * 2


def u64_to_unit_interval(u: int) -> gmpy2.mpfr:
    """Map a u64 draw to [0, 1) as u/2^64, exactly representable."""
    return gmpy2.mpfr(u) / gmpy2.mpfr(1 << 64)
