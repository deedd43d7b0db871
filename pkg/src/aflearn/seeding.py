"""Deterministic derivation of independent random substreams.

Every random stream in the repository is derived from a 64-bit master seed and
a *path* of purpose tags, e.g. ``generator(seed, "lower", branch, trial)``.
Path elements extend the spawn key of a ``numpy.random.SeedSequence``:

* a non-negative integer ``k`` contributes the two 32-bit words
  ``(k & 0xFFFFFFFF, k >> 32)``;
* a string contributes the first 64 bits of its SHA-256 digest, split the
  same way.

Because streams are keyed by tag rather than by draw order, adding a new
purpose tag never perturbs the streams of existing tags, and the same
``(seed, path)`` always yields the same generator bit for bit.  All
generators use the PCG64 bit generator.
"""

from __future__ import annotations

import hashlib

import numpy as np

SeedLike = "int | np.random.SeedSequence"


def _encode(item: int | str) -> tuple[int, int]:
    if isinstance(item, (int, np.integer)):
        value = int(item)
        if value < 0:
            raise ValueError(f"stream path integers must be non-negative, got {value}")
    elif isinstance(item, str):
        digest = hashlib.sha256(item.encode("utf-8")).digest()
        value = int.from_bytes(digest[:8], "big")
    else:
        raise TypeError(f"stream path elements must be int or str, got {type(item).__name__}")
    return (value & 0xFFFFFFFF, value >> 32)


def seed_sequence(seed: "int | np.random.SeedSequence", *path: int | str) -> np.random.SeedSequence:
    """Return the SeedSequence for ``seed`` extended by ``path``."""
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        key = tuple(seed.spawn_key)
    else:
        entropy = int(seed)
        key = ()
    for item in path:
        key = key + _encode(item)
    return np.random.SeedSequence(entropy=entropy, spawn_key=key)


def generator(seed: "int | np.random.SeedSequence", *path: int | str) -> np.random.Generator:
    """Return a fresh PCG64 generator for the substream at ``path``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def as_generator(rng: "int | np.random.SeedSequence | np.random.Generator") -> np.random.Generator:
    """Coerce a seed, SeedSequence or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return generator(rng)
