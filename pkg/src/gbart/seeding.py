"""Deterministic seed derivation.

Every concurrent unit of work (candidate fit, benchmark cell, fold) owns a
seed derived from its coordinates, never from shared RNG state, so results
are identical at any degree of parallelism.
"""

from __future__ import annotations

import zlib

import numpy as np


def child_seed(master: int, *key: int) -> int:
    """A seed derived deterministically from a master seed and integer tags."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint32)[0])


def string_tag(text: str) -> int:
    """Stable integer tag for a string (used to key seeds by dataset/method ids)."""
    return zlib.crc32(text.encode("utf-8"))
