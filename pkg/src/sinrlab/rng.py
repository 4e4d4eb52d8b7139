"""Deterministic random-stream derivation.

Every stochastic component draws from a generator derived from one master
seed plus a label path. The same (master seed, path) always maps to the
same stream, no matter how many other streams exist or in which order they
are created, which is what makes replica-level parallelism independent of
the worker count.
"""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream_key", "substream", "as_generator"]

_MASK64 = (1 << 64) - 1


def stream_key(label: int | str) -> int:
    """Map a stream label to a stable unsigned 64-bit integer."""
    if isinstance(label, (bool,)):
        raise TypeError("stream labels must be int or str, not bool")
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    if isinstance(label, str):
        digest = hashlib.blake2s(label.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    raise TypeError(f"stream labels must be int or str, got {type(label).__name__}")


def substream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Derive an independent generator from a master seed and a label path."""
    entropy = [stream_key(master_seed)] + [stream_key(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept either a raw seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed)
