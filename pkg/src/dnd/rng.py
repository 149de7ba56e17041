"""Deterministic seed derivation.

Every random stream in the system is a numpy Generator seeded through
splitmix64 so that independent components (sessions, candidates, scenarios)
get decorrelated streams from one root seed without sharing mutable state.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step; a cheap, well-mixed 64-bit permutation."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(root: int, *parts: int | str) -> int:
    """Derive a child seed from a root seed and any mix of ints/strings."""
    state = splitmix64(root & _MASK64)
    for part in parts:
        if isinstance(part, str):
            for byte in part.encode("utf-8"):
                state = splitmix64(state ^ byte)
        else:
            state = splitmix64(state ^ (int(part) & _MASK64))
    return state


def make_rng(root: int, *parts: int | str) -> np.random.Generator:
    """Generator on an independent stream keyed by (root, *parts)."""
    return np.random.Generator(np.random.PCG64(mix_seed(root, *parts)))
