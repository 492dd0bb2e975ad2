"""Seed derivation.

Every random quantity in a study is keyed by a tuple such as
``(master_seed, "ex1", 64, "rep", 17)``. :func:`derive_seed` hashes the tuple
with BLAKE2b (8-byte digest) over its canonical JSON encoding, so adding a
grid point never shifts the streams of existing ones. Data are drawn from
numpy's PCG64 seeded with the derived value; permutation relabelings use the
SplitMix64 substreams in :mod:`balldiv._kernels`.
"""

import hashlib
import json

import numpy as np

from . import _kernels

_MASK = (1 << 64) - 1


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints/strings/floats."""
    payload = json.dumps(list(parts), separators=(",", ":"), sort_keys=True).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def generator(*parts) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))


def splitmix64_key(seed: int, k: int) -> int:
    """Pure-Python twin of ``_kernels.substream_key`` (k-th SplitMix64 output)."""
    z = (seed + (k + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def substream_key(seed: int, k: int) -> int:
    return int(_kernels.substream_key(np.uint64(seed), k))
