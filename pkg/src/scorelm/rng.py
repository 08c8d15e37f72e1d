"""Platform-reproducible pseudo-random numbers via splitmix64.

Parameter initialization must be bitwise identical across runs and platforms,
so it cannot depend on any library's generator internals.  splitmix64 is a
counter-based 64-bit mixer fully specified by three constants:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15   (mod 2**64)
    z = state_i
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9        (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB        (mod 2**64)
    z = z ^ (z >> 31)

Doubles are formed from the top 53 bits: (z >> 11) * 2**-53, uniform in [0, 1).
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, n: int) -> np.ndarray:
    """Return the first n splitmix64 outputs for the given seed as uint64."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(seed: int, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """n doubles uniform in [low, high), derived from the top 53 bits."""
    u = (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return low + u * (high - low)
