"""Seeded double hashing: k bit positions per element.

Two 64-bit xxHash64 digests of the element bytes are combined as
``index_i = (h1 + i * h2) mod m`` with ``h2`` forced odd.  Numeric
identifiers are hashed through their 8-byte little-endian encoding, and a
vectorised numpy version of xxHash64 for exactly-8-byte inputs lets the
simulation hash whole streams at once with bit-identical results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import xxhash

from .exceptions import InvalidParameters

MASK64 = (1 << 64) - 1

# second-digest seed is derived from the family seed with this constant
SEED2_XOR = 0x9E3779B97F4A7C15

_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5


def encode_id(ident: int) -> bytes:
    """8-byte little-endian encoding of a numeric identifier."""
    return (int(ident) & MASK64).to_bytes(8, "little")


def _rotl(x: np.ndarray, r: int) -> np.ndarray:
    return (x << np.uint64(r)) | (x >> np.uint64(64 - r))


def xxh64_u64(values: np.ndarray, seed: int) -> np.ndarray:
    """xxHash64 of the 8-byte little-endian encoding of each uint64 value.

    Equals ``xxhash.xxh64_intdigest(encode_id(v), seed)`` elementwise.
    """
    v = np.asarray(values, dtype=np.uint64)
    u = np.uint64
    with np.errstate(over="ignore"):
        h = np.full(v.shape, (seed + _P5 + 8) & MASK64, dtype=np.uint64)
        lane = _rotl(v * u(_P2), 31) * u(_P1)
        h ^= lane
        h = _rotl(h, 27) * u(_P1) + u(_P4)
        h ^= h >> u(33)
        h *= u(_P2)
        h ^= h >> u(29)
        h *= u(_P3)
        h ^= h >> u(32)
    return h


@dataclass(frozen=True)
class HashFamily:
    """k index functions over a filter of m bits, fixed by a 64-bit seed."""

    seed: int
    k: int
    m: int

    def __post_init__(self):
        if self.k < 1 or self.m < 1 or self.k > self.m:
            raise InvalidParameters(
                f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidParameters(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def seed2(self) -> int:
        return self.seed ^ SEED2_XOR

    def digests(self, element: bytes) -> tuple[int, int]:
        h1 = xxhash.xxh64_intdigest(element, self.seed)
        h2 = xxhash.xxh64_intdigest(element, self.seed2) | 1
        return h1, h2

    def indices(self, element: bytes) -> list[int]:
        """The k bit positions of ``element`` (duplicates allowed)."""
        h1, h2 = self.digests(element)
        m = self.m
        return [(h1 + i * h2) % m for i in range(self.k)]

    def indices_u64(self, ids: np.ndarray) -> np.ndarray:
        """Positions for a batch of numeric ids, shape ``(len(ids), k)``.

        Row ``j`` equals ``indices(encode_id(ids[j]))``.
        """
        ids = np.asarray(ids, dtype=np.uint64)
        m = np.uint64(self.m)
        a = xxh64_u64(ids, self.seed) % m
        b = (xxh64_u64(ids, self.seed2) | np.uint64(1)) % m
        steps = np.arange(self.k, dtype=np.uint64)
        # a + i*b < (k+1)*m, no wraparound for any realistic m
        return (a[:, None] + steps[None, :] * b[:, None]) % m


def indices(family: HashFamily, element: bytes) -> list[int]:
    return family.indices(element)
