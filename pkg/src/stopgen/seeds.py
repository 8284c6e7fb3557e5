"""Deterministic derivation of child random seeds from a master seed.

Every stochastic stage of the pipeline (target sampling, per-source optimum
sampling, per-source optimization, per-run algorithm seeds) draws from its
own child generator whose seed is a pure function of (master seed, role,
index).  Adding a source or an algorithm therefore never perturbs the draws
of the stages that came before it.

The mixing function is fixed: the role string is hashed with FNV-1a (64 bit),
xor-combined with the master seed, and passed through two rounds of
splitmix64, with the index folded in between the rounds.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(master: int, role: str, index: int = 0) -> int:
    """Derive a 64-bit child seed for the given role and index."""
    x = _splitmix64((master & _MASK64) ^ _fnv1a64(role.encode("utf-8")))
    return _splitmix64(x ^ (index & _MASK64))


def rng_for(master: int, role: str, index: int = 0) -> np.random.Generator:
    """A fresh PCG64 generator seeded by ``derive_seed(master, role, index)``."""
    return np.random.default_rng(derive_seed(master, role, index))
