"""Deterministic child-seed derivation.

Every randomized quantity in the package draws from a generator seeded via
``child_rng``/``child_seed`` so outputs are reproducible and independent of
execution schedule: samples, episodes, and frames each get their own stream
derived from (root seed, purpose tag, indices).
"""

from __future__ import annotations

import zlib

import numpy as np

_MAX_SEED = 2**64


def _tag_to_int(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def child_sequence(root_seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    if not 0 <= root_seed < _MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {root_seed}")
    return np.random.SeedSequence([root_seed, _tag_to_int(tag), *indices])


def child_rng(root_seed: int, tag: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(child_sequence(root_seed, tag, *indices))


def child_seed(root_seed: int, tag: str, *indices: int) -> int:
    """A derived unsigned 64-bit seed, for handing to other components."""
    return int(child_sequence(root_seed, tag, *indices).generate_state(1, np.uint64)[0])
