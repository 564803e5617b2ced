"""Deterministic seed derivation for Monte Carlo trials.

Every random draw in the package comes from a generator whose seed is a pure
function of ``(base_seed, stream, index)``. Trials can therefore run in any
order, on any number of threads, and still reproduce bit for bit.

The mix is the splitmix64 finalizer. It is a bijection on 64-bit words, and
the stream tag and the index are packed into disjoint bit ranges before the
final round, so two distinct ``(stream, index)`` pairs under the same base
seed never share a seed.
"""

from enum import IntEnum

import numpy as np

MASK64 = (1 << 64) - 1
INDEX_BITS = 56
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class Stream(IntEnum):
    """Independent seed streams within one experiment."""

    GOE = 0
    WISHART = 1
    MASK = 2
    TRIALS = 3
    VERIFY = 4
    LAW = 5


def splitmix64(value: int) -> int:
    """Apply one splitmix64 round to a 64-bit word."""
    z = (value + _GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, stream: int, index: int) -> int:
    """Derive the 64-bit seed of item ``index`` in ``stream``.

    Raises:
        ValueError: If the index or the stream tag does not fit its bit range.
    """
    if not 0 <= index < (1 << INDEX_BITS):
        raise ValueError(f"Seed index out of range: {index}")
    if not 0 <= int(stream) < (1 << (64 - INDEX_BITS)):
        raise ValueError(f"Seed stream out of range: {stream}")
    packed = (int(stream) << INDEX_BITS) | index
    return splitmix64(splitmix64(base_seed & MASK64) ^ packed)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; normals are drawn with numpy's ziggurat method."""
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def trial_rng(base_seed: int, stream: int, index: int) -> np.random.Generator:
    return make_rng(derive_seed(base_seed, stream, index))
