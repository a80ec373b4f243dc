"""
Named random streams.

Every random draw in the toolkit comes from a generator derived from one user
seed and a path of stream names, so a sub-computation can be re-run on its own
and still see exactly the draws it saw inside a full run.
"""
import hashlib

import numpy as np


def _stream_key(part: str | int) -> int:
    digest = hashlib.blake2b(str(part).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(seed: int, *stream: str | int) -> np.random.Generator:
    """
    Build a generator for the stream (seed, *stream).

    Args:
        seed: User seed (non-negative)
        stream: Stream path, e.g. ("planar", "path", 3, "tree", 17)

    Returns:
        Independent numpy Generator
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_stream_key(s) for s in stream))
    return np.random.default_rng(sequence)


def derive_seed(seed: int, *stream: str | int) -> int:
    """Derive a child integer seed for APIs that take plain ints."""
    return int(derive_rng(seed, *stream).integers(0, 2**63 - 1))
