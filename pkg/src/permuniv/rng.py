"""Seeding rules.

All randomness flows through numpy's PCG64.  A run has one master seed;
trial ``i`` draws from the stream

    SeedSequence(entropy=master_seed, spawn_key=(i,))

and the 64-bit ``derived_seed`` recorded in output files is the first
64 bits of that sequence's state.  Derived seeds therefore depend only on
``(master_seed, i)``, never on execution order.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed & SEED_MASK, spawn_key=(index,))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & SEED_MASK))


def trial_rng(master_seed: int, index: int) -> tuple[int, np.random.Generator]:
    seed = derive_seed(master_seed, index)
    return seed, make_rng(seed)
