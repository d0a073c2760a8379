"""Bloom filter fused with a negative-check counter.

The counter ``s`` is incremented exactly when an element's membership check
is negative, i.e. when inserting it changes the bit array.  Each filter owns
a :class:`~bfce.estimator.CorrectionAccumulator` which is advanced on every
increment, so the corrected estimate is available at any point of a stream.
"""
from __future__ import annotations

import struct
from collections.abc import Iterable, Sequence

import numpy as np

from .estimator import CorrectionAccumulator
from .exceptions import FilterNotEmpty, MalformedInput
from .fpp import APPROXIMATE, FppModel
from .hashing import HashFamily

ONE_BY_ONE = 0
BATCH_START = 1

MAGIC = b"BFCE"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHQIQBQQdd")


class BloomFilter:
    """An m-bit Bloom filter with k hash functions and a counter ``s``.

    Args:
        m: Number of bits.
        k: Number of index functions.
        seed: 64-bit seed of the hash family.
        fpp_variant: FPP model driving the correction sums
            (``"approximate"`` by default, or ``"fill-ratio"``/``"exact"``).

    Raises:
        InvalidParameters: unless ``1 <= k <= m``.
    """

    def __init__(self, m: int, k: int, seed: int = 0, fpp_variant: str = APPROXIMATE):
        self.family = HashFamily(seed, k, m)
        self.bits = bytearray(m)  # one byte per bit; packed only on serialization
        self.s = 0
        self.ones = 0
        self.mode = ONE_BY_ONE
        self.batch_size = 0
        self.correction = CorrectionAccumulator(FppModel(fpp_variant, m, k), start=1)

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def k(self) -> int:
        return self.family.k

    @property
    def seed(self) -> int:
        return self.family.seed

    def __repr__(self):
        return (f"BloomFilter(m={self.m}, k={self.k}, seed={self.seed}, s={self.s}, "
                f"ones={self.ones}, mode={self.mode}, b={self.batch_size})")

    def __eq__(self, other):
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return (self.family == other.family and self.bits == other.bits
                and self.s == other.s and self.ones == other.ones
                and self.mode == other.mode and self.batch_size == other.batch_size
                and self.correction.start == other.correction.start
                and self.correction.sum_mean == other.correction.sum_mean
                and self.correction.sum_var == other.correction.sum_var)

    # membership

    def check_indices(self, idx: Sequence[int]) -> bool:
        bits = self.bits
        for j in idx:
            if not bits[j]:
                return False
        return True

    def check(self, element: bytes) -> bool:
        """True iff all k bits of ``element`` are set.  Never mutates."""
        return self.check_indices(self.family.indices(element))

    def __contains__(self, element: bytes) -> bool:
        return self.check(element)

    # insertion

    def insert_counting_indices(self, idx: Sequence[int]) -> bool:
        bits = self.bits
        for j in idx:
            if not bits[j]:
                break
        else:
            return False
        # accumulator first: a saturated filter must raise before any mutation
        self.correction.on_counter_increment(self.s, self.ones)
        new = 0
        for j in idx:
            if not bits[j]:
                bits[j] = 1
                new += 1
        self.ones += new
        self.s += 1
        return True

    def insert_counting(self, element: bytes) -> bool:
        """Insert ``element`` if its check is negative; return whether ``s`` moved."""
        return self.insert_counting_indices(self.family.indices(element))

    def insert_uncounted(self, element: bytes) -> None:
        """Set the element's bits without touching ``s`` or the correction sums.

        Only for building test fixtures; it breaks the counter semantics.
        """
        self._set(self.family.indices(element))

    def _set(self, idx: Iterable[int]) -> None:
        bits = self.bits
        for j in idx:
            if not bits[j]:
                bits[j] = 1
                self.ones += 1

    def _require_empty(self):
        if self.s or self.ones:
            raise FilterNotEmpty(f"batch start needs an empty filter (s={self.s}, ones={self.ones})")

    def insert_batch_indices(self, rows: Iterable[Sequence[int]]) -> int:
        """Batch start from precomputed index rows, one per distinct element."""
        self._require_empty()
        b = 0
        for idx in rows:
            self._set(idx)
            b += 1
        self.s = b
        self.mode = BATCH_START
        self.batch_size = b
        self.correction.start = b
        return b

    def insert_batch_initial(self, elements: Iterable[bytes]) -> int:
        """Insert a batch of raw elements into an empty filter at once.

        Duplicates are removed by exact byte comparison.  The batch cannot
        produce false positives, so ``s`` becomes the number of distinct
        elements and the correction sums start at that state.

        Raises:
            FilterNotEmpty: the filter already holds elements.
        """
        self._require_empty()
        distinct = dict.fromkeys(bytes(e) for e in elements)
        return self.insert_batch_indices(self.family.indices(e) for e in distinct)

    # state

    def fill_ratio_fpp(self) -> float:
        return (self.ones / self.m) ** self.k

    def recount(self) -> int:
        """Population count of the bit array, computed from scratch."""
        return self.bits.count(1)

    def packed_bits(self) -> bytes:
        return np.packbits(np.frombuffer(self.bits, dtype=np.uint8), bitorder="little").tobytes()

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, self.m, self.k, self.seed,
                              self.mode, self.batch_size if self.mode else 0, self.s,
                              self.correction.sum_mean, self.correction.sum_var)
        return header + self.packed_bits()

    @classmethod
    def from_bytes(cls, data: bytes, fpp_variant: str = APPROXIMATE) -> "BloomFilter":
        """Inverse of :meth:`to_bytes`.

        The FPP variant is not part of the format and defaults to approximate.

        Raises:
            MalformedInput: bad magic or version, inconsistent header, or
                wrong length.
        """
        data = bytes(data)
        if len(data) < _HEADER.size:
            raise MalformedInput(f"truncated header ({len(data)} bytes)")
        magic, version, m, k, seed, mode, b, s, e_acc, v_acc = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise MalformedInput(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise MalformedInput(f"unsupported format version {version}")
        if not 1 <= k <= m or mode not in (ONE_BY_ONE, BATCH_START):
            raise MalformedInput(f"inconsistent header m={m} k={k} mode={mode}")
        if mode == ONE_BY_ONE and b != 0:
            raise MalformedInput("batch size set on a one-by-one filter")
        nbytes = (m + 7) // 8
        payload = data[_HEADER.size:]
        if len(payload) != nbytes:
            raise MalformedInput(f"expected {nbytes} bytes of bits, got {len(payload)}")
        unpacked = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
        if unpacked[m:].any():
            raise MalformedInput("padding bits beyond m are set")
        try:
            filt = cls(m, k, seed, fpp_variant)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
        filt.bits = bytearray(unpacked[:m].tobytes())
        filt.ones = filt.recount()
        filt.s = s
        filt.mode = mode
        filt.batch_size = b
        filt.correction.start = b if mode == BATCH_START else 1
        filt.correction.sum_mean = e_acc
        filt.correction.sum_var = v_acc
        return filt


def new_filter(m: int, k: int, seed: int = 0) -> BloomFilter:
    return BloomFilter(m, k, seed)


def serialize(filt: BloomFilter) -> bytes:
    return filt.to_bytes()


def deserialize(data: bytes) -> BloomFilter:
    return BloomFilter.from_bytes(data)
