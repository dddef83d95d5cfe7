"""Sub-seed derivation.

Every random stream in the package is derived from one master seed with
:func:`derive_seed`. The rule is fixed so that other implementations can
reproduce it bit for bit:

    key   = f"{master_seed}:{stage}:{index}" encoded as UTF-8
    seed  = int.from_bytes(sha256(key).digest()[:8], "big")

The 64-bit integer then seeds ``numpy.random.default_rng`` (PCG64).
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, stage: str, index: int = 0) -> int:
    key = f"{int(master_seed)}:{stage}:{int(index)}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def rng_for(master_seed: int, stage: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, stage, index))
