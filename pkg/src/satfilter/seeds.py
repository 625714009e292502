"""Deterministic seed derivation.

All randomness in the package flows through numpy's PCG64 generator
(``np.random.default_rng``). Sub-seeds for instances, solvers and runs are
derived from a master seed with a keyed blake2b hash so that any run can be
regenerated in isolation without replaying the whole experiment.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, *parts: int | str) -> int:
    """Derive a 64-bit sub-seed from a master seed and a label path.

    The same (master_seed, parts) always yields the same seed; distinct
    paths are independent for practical purposes.
    """
    h = hashlib.blake2b(digest_size=8, key=struct.pack("<Q", master_seed & _MASK64))
    for part in parts:
        if isinstance(part, str):
            h.update(b"s" + part.encode("utf-8") + b"\x00")
        else:
            h.update(b"i" + struct.pack("<q", part))
    return int.from_bytes(h.digest(), "little")


def rng_from(master_seed: int, *parts: int | str) -> np.random.Generator:
    """A fresh PCG64 generator seeded from a derived sub-seed."""
    return np.random.default_rng(derive_seed(master_seed, *parts))
