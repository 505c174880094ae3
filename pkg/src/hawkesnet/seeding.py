"""Deterministic per-trial seed derivation.

Every Monte-Carlo trial derives its RNG seed as

    mix64(base_seed, d, float64 bit pattern of T, trial_index)

where ``mix64`` folds its integer arguments through the splitmix64
finalizer.  The scheme is a pure function of the experiment cell and
trial index, so results are identical across machines and worker
counts.  T enters through its IEEE-754 bit pattern because bisection
produces T values that are not members of any fixed grid.
"""

from __future__ import annotations

import struct

__all__ = ["mix64", "float_bits", "trial_seed"]

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix64(*values: int) -> int:
    """Fold nonnegative integers into one well-mixed 64-bit value."""
    acc = 0x243F6A8885A308D3  # arbitrary nonzero start
    for v in values:
        acc = _splitmix64(acc ^ (int(v) & _MASK))
    return acc


def float_bits(x: float) -> int:
    """IEEE-754 bit pattern of a float64 as an unsigned integer."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def trial_seed(base_seed: int, d: int, T: float, trial: int) -> int:
    return mix64(base_seed, d, float_bits(T), trial)
