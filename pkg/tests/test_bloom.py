import math

import numpy as np
import pytest

from naefilter.bloom import (BloomFilter, digest_mod, bloom_efficiency, bloom_fpr_theory, bloom_insert,
                             bloom_query, optimal_hash_count)
from naefilter.keyhash import HashSpec, digest
from naefilter.metrics import measure_fpr, within_sigma

from conftest import random_u64


def test_insert_then_query():
    bf = BloomFilter(1000, 4)
    bloom_insert(bf, b"hello")
    assert bloom_query(bf, b"hello")


def test_insert_idempotent():
    bf = BloomFilter(1000, 4).insert(b"x")
    before = bf.bits.copy()
    bf.insert(b"x")
    assert np.array_equal(before, bf.bits)


def test_popcount_bound():
    bf = BloomFilter(50, 7).insert(b"k")
    assert 1 <= bf.popcount() <= 7


def test_empty_and_full():
    bf = BloomFilter(64, 3)
    assert not any(bf.query(i.to_bytes(8, "little")) for i in range(200))
    bf.bits[:] = True
    assert all(bf.query(i.to_bytes(8, "little")) for i in range(200))


def test_positions_are_seeded_digests():
    bf = BloomFilter(997, 3, HashSpec(base_seed=10))
    expected = [digest(b"abc", 10 + i).as_int() % 997 for i in range(3)]
    assert bf.positions(b"abc") == expected


@pytest.mark.parametrize("n", [1, 997, 2 ** 32 - 5, 2 ** 32 + 15, 2 ** 61 - 1])
def test_digest_mod(n):
    rng = np.random.default_rng(n % 1000)
    h1 = rng.integers(0, 2 ** 64, 500, dtype=np.uint64, endpoint=False)
    h2 = rng.integers(0, 2 ** 64, 500, dtype=np.uint64, endpoint=False)
    got = digest_mod(h1, h2, n)
    assert [int(g) for g in got] == [((int(b) << 64) | int(a)) % n for a, b in zip(h1, h2)]


@pytest.mark.parametrize("n", [997, 200_000])
def test_batch_positions_match_scalar(n):
    bf = BloomFilter(n, 4, HashSpec(base_seed=3))
    keys = random_u64(300, n % 1000)
    batch = bf.positions_many(keys)
    for i, k in enumerate(keys):
        assert list(batch[i]) == bf.positions(int(k))


def test_no_false_negatives_and_monotone():
    keys = random_u64(2000, 1)
    bf = BloomFilter(10_000, 5).insert_many(keys[:1000])
    maybes = bf.query_many(keys)
    assert maybes[:1000].all()
    bf.insert_many(keys[1000:])
    assert bf.query_many(keys)[maybes].all()


def test_fpr_matches_closed_form():
    m, n, j = 2 ** 14, 200_000, 7
    keys = random_u64(m, 2)
    bf = BloomFilter(n, j).insert_many(keys)
    est = measure_fpr(bf, 1_000_000, rng_seed=5, member_set=keys)
    assert within_sigma(est, bloom_fpr_theory(n, m, j))


class TestEfficiency:
    def test_identity(self):
        assert bloom_efficiency(0.5, 100, 100) == 1.0

    @pytest.mark.parametrize("fpr", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, fpr):
        with pytest.raises(ValueError):
            bloom_efficiency(fpr, 10, 10)

    def test_optimal_hash_count(self):
        assert optimal_hash_count(10 * 1000, 1000) == round(10 * math.log(2))
