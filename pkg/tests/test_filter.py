import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfce.exceptions import FilterNotEmpty, InvalidParameters, MalformedInput
from bfce.filter import BATCH_START, MAGIC, ONE_BY_ONE, BloomFilter, deserialize, new_filter, serialize
from bfce.hashing import encode_id


def fresh_elements(n, seed=0):
    rng = np.random.default_rng(seed)
    return [rng.bytes(16) for _ in range(n)]


def test_new_filter():
    f = new_filter(8, 2, 42)
    assert f.bits == bytearray(8)
    assert (f.s, f.ones, f.mode) == (0, 0, ONE_BY_ONE)
    g = new_filter(1, 1, 0)
    assert (g.m, g.s, g.ones) == (1, 0, 0)


@pytest.mark.parametrize("m, k", [(8, 9), (0, 1), (8, 0)])
def test_new_filter_rejects(m, k):
    with pytest.raises(InvalidParameters):
        new_filter(m, k, 0)


def test_check_empty_and_after_insert():
    f = BloomFilter(8, 2, 1)
    assert not f.check(b"x")
    f.insert_counting(b"x")
    assert f.check(b"x")
    assert b"x" in f


def test_false_positive_from_other_elements():
    # find y whose two bits are covered by other inserted elements
    f = BloomFilter(8, 2, 3)
    elements = [str(i).encode() for i in range(200)]
    target = elements[0]
    t_idx = set(f.family.indices(target))
    for e in elements[1:]:
        if set(f.family.indices(e)) & t_idx:
            f.insert_counting(e)
        if all(f.bits[j] for j in t_idx):
            break
    assert f.check(target)
    s_before = f.s
    assert f.insert_counting(target) is False
    assert f.s == s_before


def test_insert_counting():
    f = BloomFilter(8, 2, 5)
    assert f.insert_counting(b"x1") is True
    assert f.s == 1 and f.ones in (1, 2)
    assert f.insert_counting(b"x1") is False
    assert f.s == 1


def test_saturated_filter_counts_nothing():
    f = BloomFilter(8, 2, 5)
    f.bits = bytearray(b"\x01" * 8)
    f.ones = 8
    assert f.insert_counting(b"fresh") is False
    assert f.s == 0


def test_ones_bounded_by_k_times_s():
    f = BloomFilter(64, 3, 2)
    for e in fresh_elements(40):
        f.insert_counting(e)
        assert f.ones <= min(f.m, f.k * f.s)


def test_batch_initial():
    f = BloomFilter(162945, 6, 0)
    elements = fresh_elements(50)
    assert f.insert_batch_initial(elements + elements[:10]) == 50
    assert f.s == 50 and f.mode == BATCH_START and f.batch_size == 50
    assert all(f.check(e) for e in elements)
    assert f.correction.sum_mean == 0.0 and f.correction.start == 50


def test_batch_initial_empty_list():
    f = BloomFilter(8, 2, 0)
    assert f.insert_batch_initial([]) == 0
    assert f.s == 0


def test_batch_initial_requires_empty_filter():
    f = BloomFilter(8, 2, 0)
    f.insert_counting(b"a")
    with pytest.raises(FilterNotEmpty):
        f.insert_batch_initial([b"b"])


def test_fill_ratio_fpp():
    f = BloomFilter(8, 2, 0)
    assert f.fill_ratio_fpp() == 0.0
    f.bits[:4] = b"\x01" * 4
    f.ones = 4
    assert f.fill_ratio_fpp() == 0.25
    f.bits[:] = b"\x01" * 8
    f.ones = 8
    assert f.fill_ratio_fpp() == 1.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 64 - 1), m=st.integers(8, 4096), k=st.integers(1, 6),
       n=st.integers(0, 10_000), dup=st.integers(1, 5))
def test_no_false_negatives_and_counter_bookkeeping(seed, m, k, n, dup):
    k = min(k, m)
    f = BloomFilter(m, k, seed)
    rng = np.random.default_rng(seed % 2 ** 32)
    ids = rng.integers(0, max(1, n // dup), size=n).tolist()
    history = [encode_id(i) for i in ids]
    negatives = 0
    for e in history:
        was_negative = not f.check(e)
        assert f.insert_counting(e) is was_negative
        negatives += was_negative
    assert f.s == negatives <= len(set(history))
    assert f.ones == f.recount()
    assert all(f.check(e) for e in history)


def test_identical_filters_are_bit_identical():
    a, b = BloomFilter(1000, 4, 77), BloomFilter(1000, 4, 77)
    for e in fresh_elements(300, 1):
        a.insert_counting(e)
        b.insert_counting(e)
    assert a == b and a.bits == b.bits


def test_serialize_layout():
    f = BloomFilter(10, 2, 3)
    f.bits[0] = f.bits[9] = 1
    f.ones = 2
    data = serialize(f)
    assert data[:4] == MAGIC
    assert struct.unpack_from("<H", data, 4)[0] == 1
    assert len(data) == 59 + 2
    # bit j lives in byte j // 8 at position j % 8
    assert data[59:] == bytes([0b00000001, 0b00000010])


def test_roundtrip_empty():
    f = BloomFilter(8, 2, 9)
    assert deserialize(serialize(f)) == f


def test_roundtrip_after_insertions():
    f = BloomFilter(5000, 4, 123)
    for e in fresh_elements(100, 2):
        f.insert_counting(e)
    g = deserialize(serialize(f))
    assert g == f
    assert g.correction.sum_mean == f.correction.sum_mean > 0
    probes = fresh_elements(1000, 3) + fresh_elements(100, 2)
    assert [g.check(p) for p in probes] == [f.check(p) for p in probes]


def test_roundtrip_batch_mode():
    f = BloomFilter(4096, 3, 1)
    f.insert_batch_initial(fresh_elements(20))
    for e in fresh_elements(200, 5):
        f.insert_counting(e)
    g = BloomFilter.from_bytes(f.to_bytes())
    assert g == f and g.mode == BATCH_START and g.batch_size == 20


@pytest.mark.parametrize("mutate", [
    lambda d: d[:-1],
    lambda d: d[:30],
    lambda d: b"XXXX" + d[4:],
    lambda d: d[:4] + struct.pack("<H", 2) + d[6:],
    lambda d: d + b"\x00",
    lambda d: d[:-1] + b"\xff",  # padding bits beyond m
])
def test_deserialize_malformed(mutate):
    f = BloomFilter(10, 2, 3)
    with pytest.raises(MalformedInput):
        deserialize(mutate(serialize(f)))
