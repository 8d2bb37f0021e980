"""Deterministic seed derivation.

Every randomized component takes a single u64 seed and derives independent
sub-seeds from string tags, so runs are reproducible across processes
regardless of PYTHONHASHSEED, worker scheduling, or call order.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *tags: object) -> int:
    """Mix a base seed with a tag path into a new u64 seed."""
    h = hashlib.sha256()
    h.update(str(int(seed) & _MASK64).encode())
    for tag in tags:
        h.update(b"/")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "big")
