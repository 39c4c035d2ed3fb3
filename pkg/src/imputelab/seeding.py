"""Deterministic seed derivation for independent random streams.

Every stochastic stage of the toolkit draws from its own
``numpy.random.Generator`` whose seed is derived from a master seed, an
iterate index, and a short stage tag. The mixer is a splitmix64-style
avalanche, so nearby inputs land on unrelated 64-bit outputs and two
distinct tags collide only with probability ~2**-64.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, iterate: int, stage_tag: str) -> int:
    """Derive a 64-bit seed from (master_seed, iterate, stage_tag).

    Pure function of its inputs: the same triple always yields the same
    seed, and distinct triples yield distinct seeds up to 64-bit
    collisions. ``iterate`` may be negative (it is folded into the mask).

    Parameters
    ----------
    master_seed : int
        Run-level seed.
    iterate : int
        Monte-Carlo iterate index (or 0 for one-shot stages).
    stage_tag : str
        Short label naming the consuming stage, e.g. ``"ampute:0.3"``.

    Returns
    -------
    int
        Seed in ``[0, 2**64)``.
    """
    h = _mix(master_seed & _MASK64)
    h = _mix(h ^ (iterate & _MASK64))
    for byte in stage_tag.encode("utf-8"):
        h = _mix(h ^ byte)
    return h


def rng_for(master_seed: int, iterate: int, stage_tag: str) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed` of the same triple."""
    return np.random.default_rng(derive_seed(master_seed, iterate, stage_tag))
