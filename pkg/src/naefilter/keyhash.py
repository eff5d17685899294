"""Seeded key hashing and key -> clause derivation.

Each key is hashed with MurmurHash3 x64_128; the 128-bit digest is read as a
little-endian bit stream (bit ``i`` of ``h1`` first, then ``h2``). When a stream
runs dry the counter is bumped and the key is re-hashed, extending the stream
indefinitely. A literal consumes ``ceil(log2 n)`` bits for its variable
(rejection-sampled against ``>= n`` and against variables already in the
clause) followed by one sign bit.

In ``TWO`` hash mode variables come from ``base_seed`` and signs from
``base_seed + 1``; in ``ONE`` hash mode a single stream supplies both.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cnf import Clause, Cnf, ContractError, Literal
from .murmur import murmur3_x64_128, murmur3_x64_128_batch

ALGORITHM_MURMUR3_X64_128 = 1
KNOWN_ALGORITHMS = {ALGORITHM_MURMUR3_X64_128}

_COUNTER_STRIDE = 0x9E3779B9


class HashMode(enum.IntEnum):
    ONE = 0
    TWO = 1


@dataclass(frozen=True)
class HashSpec:
    algorithm_id: int = ALGORITHM_MURMUR3_X64_128
    mode: HashMode = HashMode.ONE
    base_seed: int = 0

    def __post_init__(self):
        if self.algorithm_id not in KNOWN_ALGORITHMS:
            raise ValueError(f"unknown hash algorithm id {self.algorithm_id}")
        object.__setattr__(self, "mode", HashMode(self.mode))
        if not 0 <= self.base_seed <= 0xFFFFFFFF:
            raise ValueError("base_seed must fit in 32 bits")


class KeyDigest(NamedTuple):
    h1: int
    h2: int

    def as_int(self):
        return self.h1 | (self.h2 << 64)


def effective_seed(seed, counter):
    return (seed + counter * _COUNTER_STRIDE) & 0xFFFFFFFF


def digest(key: bytes, seed: int, counter: int = 0) -> KeyDigest:
    return KeyDigest(*murmur3_x64_128(key, effective_seed(seed, counter)))


def var_bits(n):
    """Bits drawn per variable index: ceil(log2 n), at least 1."""
    return max(1, int(n - 1).bit_length())


class _BitStream:
    def __init__(self, key, seed):
        self.key = key
        self.seed = seed
        self.counter = 0
        self.buf = 0
        self.avail = 0

    def take(self, width):
        while self.avail < width:
            d = digest(self.key, self.seed, self.counter)
            self.buf |= d.as_int() << self.avail
            self.avail += 128
            self.counter += 1
        out = self.buf & ((1 << width) - 1)
        self.buf >>= width
        self.avail -= width
        return out


def _check_params(n, k):
    if k < 2:
        raise ContractError("clause width k must be >= 2")
    if n < k:
        raise ContractError(f"need n >= k (got n={n}, k={k})")


def derive_clause(key: bytes, spec: HashSpec, n: int, k: int) -> Clause:
    _check_params(n, k)
    key = bytes(key)
    w = var_bits(n)
    stream = _BitStream(key, spec.base_seed)
    signs = stream if spec.mode == HashMode.ONE else _BitStream(key, (spec.base_seed + 1) & 0xFFFFFFFF)
    chosen = []
    lits = []
    while len(lits) < k:
        v = stream.take(w)
        if v >= n or v in chosen:
            continue
        chosen.append(v)
        lits.append(Literal(v, bool(signs.take(1))))
    return Clause(tuple(lits))


def as_key_matrix(keys):
    """Normalise a key batch to a list of ``(indices, (N, L) uint8)`` groups.

    Accepts a uint64 array (each key serialised as 8 little-endian bytes) or a
    sequence of byte strings (grouped by length).
    """
    if isinstance(keys, np.ndarray) and keys.dtype.kind in "ui" and keys.ndim == 1:
        mat = keys.astype("<u8").view(np.uint8).reshape(-1, 8)
        return [(np.arange(len(keys)), mat)]
    keys = [bytes(k) for k in keys]
    groups = {}
    for i, key in enumerate(keys):
        groups.setdefault(len(key), []).append(i)
    out = []
    for length, idx in groups.items():
        buf = b"".join(keys[i] for i in idx)
        mat = np.frombuffer(buf, dtype=np.uint8).reshape(len(idx), length)
        out.append((np.asarray(idx), mat))
    return out


def key_bytes(key):
    if isinstance(key, (int, np.integer)):
        return int(key).to_bytes(8, "little")
    return bytes(key)


def _stream_bits(mat, seed, ncounters):
    words = []
    for c in range(ncounters):
        h1, h2 = murmur3_x64_128_batch(mat, effective_seed(seed, c))
        words.append(h1)
        words.append(h2)
    w = np.stack(words, axis=1).astype("<u8")
    return np.unpackbits(w.view(np.uint8), axis=1, bitorder="little")


def _draw(bits, rows, pos, width):
    cols = pos[:, None] + np.arange(width)[None, :]
    vals = bits[rows[:, None], cols].astype(np.int64)
    return (vals << np.arange(width)[None, :]).sum(axis=1)


def derive_clause_arrays(keys, spec: HashSpec, n: int, k: int, ncounters=2):
    """Vectorised :func:`derive_clause` for a batch of keys.

    Returns ``(vars, neg)`` arrays of shape ``(N, k)``. Keys whose draws run past
    the pre-hashed ``ncounters`` digests fall back to the scalar path.
    """
    _check_params(n, k)
    groups = as_key_matrix(keys)
    total = sum(len(idx) for idx, _ in groups)
    out_vars = np.zeros((total, k), dtype=np.int64)
    out_neg = np.zeros((total, k), dtype=bool)
    w = var_bits(n)
    two = spec.mode == HashMode.TWO
    for idx, mat in groups:
        cnt = mat.shape[0]
        if cnt == 0:
            continue
        bits = _stream_bits(mat, spec.base_seed, ncounters)
        sbits = _stream_bits(mat, (spec.base_seed + 1) & 0xFFFFFFFF, 1) if two else None
        limit = bits.shape[1]
        vars_ = np.full((cnt, k), -1, dtype=np.int64)
        neg = np.zeros((cnt, k), dtype=bool)
        filled = np.zeros(cnt, dtype=np.int64)
        pos = np.zeros(cnt, dtype=np.int64)
        fallback = np.zeros(cnt, dtype=bool)
        active = np.arange(cnt)
        while active.size:
            need = w + (0 if two else 1)
            short = pos[active] + need > limit
            if short.any():
                fallback[active[short]] = True
                active = active[~short]
                if not active.size:
                    break
            v = _draw(bits, active, pos[active], w)
            pos[active] += w
            dup = (vars_[active] == v[:, None]).any(axis=1)
            ok = (v < n) & ~dup
            acc = active[ok]
            slot = filled[acc]
            vars_[acc, slot] = v[ok]
            if two:
                neg[acc, slot] = sbits[acc, slot].astype(bool)
            else:
                neg[acc, slot] = bits[acc, pos[acc]].astype(bool)
                pos[acc] += 1
            filled[acc] += 1
            active = active[filled[active] < k]
        for i in np.flatnonzero(fallback):
            c = derive_clause(bytes(mat[i]), spec, n, k)
            vars_[i] = c.vars
            neg[i] = [lit.negated for lit in c.literals]
        out_vars[idx] = vars_
        out_neg[idx] = neg
    return out_vars, out_neg


def build_cnf(keys, spec: HashSpec, n: int, k: int) -> Cnf:
    """The formula with one derived clause per key, in key order."""
    vars_, neg = derive_clause_arrays(keys, spec, n, k)
    return Cnf(n, vars_, neg, k=k)
