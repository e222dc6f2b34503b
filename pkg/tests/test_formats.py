import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsketch import CompressedBlock, FormatError, decode_block, encode_block
from polarsketch.storage import Provenance, StorageSet, decode_pset, encode_pset


def random_block(rng) -> CompressedBlock:
    a = int(rng.choice([2, 3, 5, 7]))
    n = int(2 ** rng.integers(1, 7))
    bitmap = rng.random(n) < rng.random()
    stored = rng.integers(0, a, size=int(bitmap.sum()))
    free = np.flatnonzero(~bitmap)
    k = int(rng.integers(0, min(3, free.size) + 1))
    checkers = np.sort(rng.choice(free, size=k, replace=False)) if k else np.array([], dtype=int)
    return CompressedBlock(
        a=a, n=n, rate_param=float(rng.random()), delta=float(rng.random() * 0.5),
        storage_bitmap=bitmap, stored_symbols=stored,
        checker_indices=checkers, checker_symbols=rng.integers(0, a, size=k),
    )


def random_pset(rng) -> StorageSet:
    a = int(rng.choice([2, 3, 5]))
    n = int(2 ** rng.integers(1, 10))
    count = int(rng.integers(0, n + 1))
    idx = np.sort(rng.choice(n, size=count, replace=False))
    kind = str(rng.choice(["exact", "monte_carlo", "bec"]))
    return StorageSet(n, a, float(rng.random() * 0.9 + 0.01), idx, Provenance(kind))


def test_plrc_round_trips_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        block = random_block(rng)
        back = decode_block(encode_block(block))
        assert back.a == block.a and back.n == block.n
        assert back.rate_param == block.rate_param and back.delta == block.delta
        assert np.array_equal(back.storage_bitmap, block.storage_bitmap)
        assert np.array_equal(back.stored_symbols, block.stored_symbols)
        assert np.array_equal(back.checker_indices, block.checker_indices)
        assert np.array_equal(back.checker_symbols, block.checker_symbols)


def test_plrc_empty_storage_set():
    block = CompressedBlock(
        a=2, n=8, rate_param=0.5, delta=0.01,
        storage_bitmap=np.zeros(8, dtype=bool), stored_symbols=np.array([], dtype=int),
        checker_indices=np.array([7]), checker_symbols=np.array([1]),
    )
    back = decode_block(encode_block(block))
    assert back.stored_symbols.size == 0
    assert np.array_equal(back.checker_symbols, [1])


def test_plrc_corrupted_magic_offset_zero():
    data = bytearray(encode_block(random_block(np.random.default_rng(1))))
    data[0] ^= 0xFF
    with pytest.raises(FormatError) as err:
        decode_block(bytes(data))
    assert err.value.offset == 0


def test_plrc_crc_detects_flips():
    rng = np.random.default_rng(7)
    block = random_block(rng)
    data = encode_block(block)
    for _ in range(100):
        mutated = bytearray(data)
        pos = int(rng.integers(4, len(data)))
        mutated[pos] ^= int(rng.integers(1, 256))
        with pytest.raises(FormatError):
            decode_block(bytes(mutated))


def test_plrc_truncation():
    data = encode_block(random_block(np.random.default_rng(3)))
    for cut in (1, 5, len(data) // 2, len(data) - 1):
        with pytest.raises(FormatError):
            decode_block(data[:cut])


@settings(max_examples=300, deadline=None)
@given(data=st.binary(min_size=0, max_size=200))
def test_plrc_fuzz_never_crashes(data):
    try:
        decode_block(data)
    except FormatError:
        pass


def test_pset_round_trips_randomized():
    rng = np.random.default_rng(2025)
    for _ in range(1000):
        s = random_pset(rng)
        back = decode_pset(encode_pset(s))
        assert (back.n, back.a) == (s.n, s.a)
        assert back.delta == s.delta
        assert back.provenance.kind == s.provenance.kind
        assert np.array_equal(back.indices, s.indices)


@settings(max_examples=300, deadline=None)
@given(data=st.binary(min_size=0, max_size=120))
def test_pset_fuzz_never_crashes(data):
    try:
        decode_pset(data)
    except FormatError:
        pass


def test_pset_mutation_fuzz():
    rng = np.random.default_rng(8)
    data = encode_pset(random_pset(rng))
    for _ in range(200):
        mutated = bytearray(data)
        pos = int(rng.integers(0, len(data)))
        mutated[pos] ^= int(rng.integers(1, 256))
        try:
            decode_pset(bytes(mutated))
        except FormatError:
            pass
