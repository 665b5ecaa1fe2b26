"""Counter-based 64-bit mixing for reproducible, partition-independent sampling.

Sample ``i`` of master seed ``s`` uses the key
``splitmix64(splitmix64(s) + i * GOLDEN)``; lane ``c`` of that sample is
``splitmix64(key + (c + 1) * GOLDEN)``.  All arithmetic is mod 2**64.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def sample_keys(seed: int, start: int, count: int) -> np.ndarray:
    base = splitmix64(np.uint64(seed % 2**64))
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return splitmix64(base + idx * GOLDEN)


def lanes(keys: np.ndarray, n: int) -> np.ndarray:
    """``(len(keys), n)`` array of 64-bit words."""
    out = np.empty((keys.size, n), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for c in range(n):
            out[:, c] = splitmix64(keys + np.uint64(c + 1) * GOLDEN)
    return out


def unit_interval(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to ``(2u+1)/2**53`` in (0,1), ``u`` the top 52 bits.

    Every result is an exact double, so exact rechecks can use
    ``Fraction(x)`` directly.
    """
    return (2.0 * (words >> np.uint64(12)).astype(np.float64) + 1.0) * 2.0**-53


def box_muller(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def uniform_points(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    """Points in (0,1)^dim, one row per sample index."""
    return unit_interval(lanes(sample_keys(seed, start, count), dim))


def standard_normals(seed: int, start: int, count: int) -> np.ndarray:
    """One N(0,1) variate per sample index by Box-Muller on two lanes."""
    u = uniform_points(seed, start, count, 2)
    return box_muller(u[:, 0], u[:, 1])
