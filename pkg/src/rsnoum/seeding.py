"""Deterministic seed derivation for independently re-runnable trials."""
from __future__ import annotations

import numpy as np

CHANNEL = 0
CSIT = 1
TRIAL = 2


def derive_seed(*keys: int) -> int:
    """Hash a tuple of non-negative integers into a 63-bit seed."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1
