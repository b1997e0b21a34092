"""Deterministic per-component RNG derivation from one root seed.

Every source of randomness in the pipeline obtains its generator through
``rng_for(root_seed, *path)``, where the path names the component and any
counters (e.g. ``rng_for(7, "datagen", "scene", 12)``). String path
elements are hashed with SHA-256 so the scheme is stable across runs,
platforms and Python versions.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _path_entropy(element) -> int:
    if isinstance(element, str):
        digest = hashlib.sha256(element.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    if isinstance(element, (int, np.integer)):
        return int(element)
    raise TypeError(f"seed path elements must be str or int, got {type(element)!r}")


def seed_sequence(root_seed: int, *path) -> np.random.SeedSequence:
    entropy = [int(root_seed)] + [_path_entropy(p) for p in path]
    return np.random.SeedSequence(entropy)


def rng_for(root_seed: int, *path) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, *path)))
