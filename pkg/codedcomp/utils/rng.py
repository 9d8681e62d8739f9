"""
codedcomp Random Streams

Counter-based generators keyed by (seed, *keys) so that any chunk of any
experiment can be regenerated independently of worker scheduling.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _as_word(key: Key) -> int:
    if isinstance(key, str):
        # stable across processes, unlike hash()
        return int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "little")
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return int(key)


def keyed_rng(seed: int, *keys: Key) -> np.random.Generator:
    """Philox generator for the stream identified by seed and keys."""
    entropy = [int(seed)] + [_as_word(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def chunk_sizes(total: int, chunk_size: int):
    """Yield (chunk_index, size) pairs covering `total` items."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    index = 0
    done = 0
    while done < total:
        size = min(chunk_size, total - done)
        yield index, size
        done += size
        index += 1
