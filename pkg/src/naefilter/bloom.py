"""Classic Bloom filter used as the comparison baseline.

Hash ``i`` of ``j`` is the 128-bit MurmurHash3 digest of the key under seed
``base_seed + i``, reduced modulo the bit count. No double hashing.
"""

import math

import numpy as np

from .keyhash import HashSpec, as_key_matrix, digest, key_bytes
from .murmur import murmur3_x64_128_batch


def optimal_hash_count(n, m):
    """Number of hash functions minimising the FPR for n bits and m keys."""
    return max(1, round(n / m * math.log(2)))


def digest_mod(h1, h2, n):
    """``(h2 * 2**64 + h1) % n`` for uint64 arrays."""
    if n < (1 << 32):
        nn = np.uint64(n)
        r64 = np.uint64((1 << 64) % n)
        return (((h2 % nn) * r64) % nn + h1 % nn) % nn
    return np.array([((int(b) << 64) | int(a)) % n for a, b in zip(h1, h2)], dtype=np.uint64)


def bloom_fpr_theory(n, m, j):
    return (1.0 - math.exp(-j * m / n)) ** j


class BloomFilter:
    def __init__(self, n, j, hash_spec=HashSpec()):
        if n < 1 or j < 1:
            raise ValueError("need n >= 1 bits and j >= 1 hash functions")
        self.n = int(n)
        self.j = int(j)
        self.hash_spec = hash_spec
        self.bits = np.zeros(self.n, dtype=bool)

    @classmethod
    def tuned(cls, n, m, hash_spec=HashSpec()):
        return cls(n, optimal_hash_count(n, m), hash_spec)

    def positions(self, key):
        key = key_bytes(key)
        seed = self.hash_spec.base_seed
        return [digest(key, (seed + i) & 0xFFFFFFFF).as_int() % self.n for i in range(self.j)]

    def positions_many(self, keys):
        """``(N, j)`` array of bit positions for a batch of keys."""
        groups = as_key_matrix(keys)
        total = sum(len(idx) for idx, _ in groups)
        out = np.zeros((total, self.j), dtype=np.int64)
        n = self.n
        for idx, mat in groups:
            for i in range(self.j):
                h1, h2 = murmur3_x64_128_batch(mat, (self.hash_spec.base_seed + i) & 0xFFFFFFFF)
                out[idx, i] = digest_mod(h1, h2, n).astype(np.int64)
        return out

    def insert(self, key):
        self.bits[self.positions(key)] = True
        return self

    def insert_many(self, keys):
        self.bits[self.positions_many(keys).reshape(-1)] = True
        return self

    def query(self, key) -> bool:
        return bool(self.bits[self.positions(key)].all())

    def query_many(self, keys):
        return self.bits[self.positions_many(keys)].all(axis=1)

    def popcount(self):
        return int(np.count_nonzero(self.bits))

    def __contains__(self, key):
        return self.query(key)


def bloom_insert(bf: BloomFilter, key) -> BloomFilter:
    return bf.insert(key)


def bloom_query(bf: BloomFilter, key) -> bool:
    return bf.query(key)


def bloom_efficiency(measured_fpr, n, m):
    """-log2(fpr) bits of discrimination per stored bit per key."""
    if not 0.0 < measured_fpr < 1.0:
        raise ValueError("fpr must lie strictly between 0 and 1")
    return -math.log2(measured_fpr) / (n / m)
