"""Deterministic derivation of child seeds from a base seed and an index path."""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed"]

_U64 = (1 << 64) - 1


def derive_seed(base: int, *path: int) -> int:
    """Derive an independent child seed from ``base`` and an integer path.

    Uses numpy's SeedSequence hashing, so (base, path) -> seed is stable
    across runs, platforms, and worker layouts. Distinct paths give
    statistically independent streams.
    """
    entropy = [int(base) & _U64] + [int(p) & _U64 for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
