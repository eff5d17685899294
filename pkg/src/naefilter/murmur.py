"""MurmurHash3 x64_128.

A scalar implementation for arbitrary byte strings and a numpy version that
hashes a whole batch of equal-length keys at once. Both produce the pair of
64-bit words ``(h1, h2)`` exactly as the reference C++ ``MurmurHash3_x64_128``
writes them to its output buffer.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF

C1 = 0x87C37B91114253D5
C2 = 0x4CF5AD432745937F


def _rotl(x, r):
    return ((x << r) | (x >> (64 - r))) & MASK64


def _fmix(k):
    k ^= k >> 33
    k = (k * 0xFF51AFD7ED558CCD) & MASK64
    k ^= k >> 33
    k = (k * 0xC4CEB9FE1A85EC53) & MASK64
    k ^= k >> 33
    return k


def murmur3_x64_128(key, seed=0):
    """Return ``(h1, h2)`` for ``key`` under a 32-bit ``seed``."""
    key = bytes(key)
    length = len(key)
    nblocks = length // 16
    h1 = h2 = seed & 0xFFFFFFFF

    for i in range(nblocks):
        k1 = int.from_bytes(key[16 * i:16 * i + 8], "little")
        k2 = int.from_bytes(key[16 * i + 8:16 * i + 16], "little")

        k1 = (k1 * C1) & MASK64
        k1 = _rotl(k1, 31)
        k1 = (k1 * C2) & MASK64
        h1 ^= k1
        h1 = _rotl(h1, 27)
        h1 = (h1 + h2) & MASK64
        h1 = (h1 * 5 + 0x52DCE729) & MASK64

        k2 = (k2 * C2) & MASK64
        k2 = _rotl(k2, 33)
        k2 = (k2 * C1) & MASK64
        h2 ^= k2
        h2 = _rotl(h2, 31)
        h2 = (h2 + h1) & MASK64
        h2 = (h2 * 5 + 0x38495AB5) & MASK64

    tail = key[16 * nblocks:]
    t = len(tail)
    if t > 8:
        k2 = int.from_bytes(tail[8:], "little")
        k2 = (k2 * C2) & MASK64
        k2 = _rotl(k2, 33)
        k2 = (k2 * C1) & MASK64
        h2 ^= k2
    if t > 0:
        k1 = int.from_bytes(tail[:8], "little")
        k1 = (k1 * C1) & MASK64
        k1 = _rotl(k1, 31)
        k1 = (k1 * C2) & MASK64
        h1 ^= k1

    h1 ^= length
    h2 ^= length
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    h1 = _fmix(h1)
    h2 = _fmix(h2)
    h1 = (h1 + h2) & MASK64
    h2 = (h2 + h1) & MASK64
    return h1, h2


# numpy uint64 arithmetic wraps modulo 2**64, which is what the hash needs.

def _np_rotl(x, r):
    return (x << np.uint64(r)) | (x >> np.uint64(64 - r))


def _np_fmix(k):
    k = k ^ (k >> np.uint64(33))
    k = k * np.uint64(0xFF51AFD7ED558CCD)
    k = k ^ (k >> np.uint64(33))
    k = k * np.uint64(0xC4CEB9FE1A85EC53)
    k = k ^ (k >> np.uint64(33))
    return k


def _le_words(chunk):
    # chunk: (N, w) uint8 with w <= 8, little-endian word value
    w = chunk.shape[1]
    if w == 8:
        return np.ascontiguousarray(chunk).view("<u8").reshape(-1).astype(np.uint64)
    out = np.zeros(chunk.shape[0], dtype=np.uint64)
    for j in range(w):
        out |= chunk[:, j].astype(np.uint64) << np.uint64(8 * j)
    return out


def murmur3_x64_128_batch(keys, seeds):
    """Hash every row of ``keys`` (an ``(N, L)`` uint8 array).

    ``seeds`` is a scalar or an array of N 32-bit seeds. Returns two uint64
    arrays ``(h1, h2)`` of length N.
    """
    keys = np.asarray(keys, dtype=np.uint8)
    if keys.ndim != 2:
        raise ValueError("keys must be a 2-D uint8 array")
    count, length = keys.shape
    seeds = np.broadcast_to(np.asarray(seeds, dtype=np.uint64) & np.uint64(0xFFFFFFFF), (count,))
    h1 = seeds.copy()
    h2 = seeds.copy()
    c1 = np.uint64(C1)
    c2 = np.uint64(C2)

    with np.errstate(over="ignore"):
        nblocks = length // 16
        for i in range(nblocks):
            k1 = _le_words(keys[:, 16 * i:16 * i + 8])
            k2 = _le_words(keys[:, 16 * i + 8:16 * i + 16])

            k1 = _np_rotl(k1 * c1, 31) * c2
            h1 ^= k1
            h1 = (_np_rotl(h1, 27) + h2) * np.uint64(5) + np.uint64(0x52DCE729)

            k2 = _np_rotl(k2 * c2, 33) * c1
            h2 ^= k2
            h2 = (_np_rotl(h2, 31) + h1) * np.uint64(5) + np.uint64(0x38495AB5)

        tail = keys[:, 16 * nblocks:]
        t = tail.shape[1]
        if t > 8:
            k2 = _le_words(tail[:, 8:])
            h2 ^= _np_rotl(k2 * c2, 33) * c1
        if t > 0:
            k1 = _le_words(tail[:, :8])
            h1 ^= _np_rotl(k1 * c1, 31) * c2

        h1 ^= np.uint64(length)
        h2 ^= np.uint64(length)
        h1 = h1 + h2
        h2 = h2 + h1
        h1 = _np_fmix(h1)
        h2 = _np_fmix(h2)
        h1 = h1 + h2
        h2 = h2 + h1
    return h1, h2
