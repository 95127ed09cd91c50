"""
Deterministic random streams.

Every sweep cell and trial gets its own seed derived from the run seed, so
results do not depend on which worker ran which cell or in what order.
"""

import hashlib

import numpy as np

from .errors import DomainError


def derive_seed(seed: int, tag: str, cell: int = 0, trial: int = 0) -> int:
    """
    Stable 64-bit mix of (seed, tag, cell, trial).

    Args:
        seed: run seed
        tag: name of the mode or stream, e.g. "gamma-sweep"
        cell: grid cell index
        trial: trial index within the cell
    """
    if cell < 0 or trial < 0:
        raise DomainError("cell and trial indices must be non-negative")
    digest = hashlib.sha256(f"{seed}:{tag}:{cell}:{trial}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))
