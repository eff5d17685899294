"""The NAE-SAT membership filter.

Solutions are stored variable-major: row ``i`` of the solution matrix holds
variable ``i`` of every stored solution, one solution per bit lane, packed into
``ceil(s / 64)`` little-endian 64-bit words. A query clause touches ``k`` rows;
per word it computes

    L_j  = row[var_j] XOR (all ones if literal j is negated)
    pass = (L_1 | ... | L_k) & ~(L_1 & ... & L_k)

and answers *maybe* only when every live lane of ``pass`` is set.
"""

import struct
import time
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .cnf import Assignment, Cnf, ContractError, eval_clause_nae, eval_clause_sat
from .keyhash import (ALGORITHM_MURMUR3_X64_128, KNOWN_ALGORITHMS, HashMode, HashSpec,
                      build_cnf, derive_clause, derive_clause_arrays, key_bytes)
from .solvers import (PARALLEL_TEMPERING, WALKSAT, CollectError, SolverBudget,
                      TemperatureLadder, collect_solutions, DEFAULT_NOISE)

MAGIC = b"NAEF"
FORMAT_VERSION = 1
HEADER_SIZE = 64
_HEADER = struct.Struct("<4sHHQQIHBIH")

ENGINE_IDS = {WALKSAT: 1, PARALLEL_TEMPERING: 2, "imported": 3}
ENGINE_NAMES = {v: k for k, v in ENGINE_IDS.items()}

# alpha above which a build is likely to stall; NAE threshold estimate for width k
# (2^(k-1) ln 2 - ln 2 / 2 - 1/4), used only for an advisory warning.
def nae_threshold_estimate(k):
    return 2 ** (k - 1) * np.log(2) - np.log(2) / 2 - 0.25


class FilterFormatError(ValueError):
    pass


class BuildError(RuntimeError):
    def __init__(self, message, solutions, alpha, attempts):
        super().__init__(message)
        self.solutions = solutions
        self.achieved_s = len(solutions)
        self.alpha = alpha
        self.attempts = attempts


def words_per_row(s):
    return (s + 63) // 64


def lane_masks(s):
    """Per-word masks of the live solution lanes."""
    w = words_per_row(s)
    masks = np.full(w, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    rem = s % 64
    if rem:
        masks[-1] = np.uint64((1 << rem) - 1)
    return masks


class SolutionMatrix:
    """``n`` bit-rows of ``s`` solutions each, packed into uint64 words."""

    __slots__ = ("words", "s")

    def __init__(self, words, s):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != words_per_row(s):
            raise ContractError("word array does not match the solution count")
        if s < 1:
            raise ContractError("need at least one solution")
        masks = lane_masks(s)
        if np.any(words & ~masks):
            raise ContractError("pad bits beyond lane s must be zero")
        words.setflags(write=False)
        self.words = words
        self.s = int(s)

    @classmethod
    def pack(cls, solutions: Sequence[Assignment]):
        if not solutions:
            raise ContractError("need at least one solution")
        n = len(solutions[0])
        if any(len(a) != n for a in solutions):
            raise ContractError("solutions differ in length")
        s = len(solutions)
        w = words_per_row(s)
        bits = np.zeros((n, w * 64), dtype=np.uint8)
        bits[:, :s] = np.stack([a.bits for a in solutions], axis=1)
        packed = np.packbits(bits, axis=1, bitorder="little")
        return cls(packed.view("<u8").astype(np.uint64), s)

    @property
    def n(self):
        return self.words.shape[0]

    def column(self, j) -> Assignment:
        if not 0 <= j < self.s:
            raise IndexError(j)
        word, bit = divmod(j, 64)
        return Assignment((self.words[:, word] >> np.uint64(bit)) & np.uint64(1))

    def unpack(self) -> List[Assignment]:
        return [self.column(j) for j in range(self.s)]

    def __eq__(self, other):
        return (isinstance(other, SolutionMatrix) and self.s == other.s
                and np.array_equal(self.words, other.words))


@dataclass(frozen=True)
class FilterHeader:
    k: int
    n: int
    m: int
    s: int
    hash_spec: HashSpec
    build_engine: str = WALKSAT
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.k < 2 or self.n < self.k:
            raise ContractError(f"need n >= k >= 2 (got n={self.n}, k={self.k})")
        if self.s < 1:
            raise ContractError("s must be >= 1")
        if self.m < 1:
            raise ContractError("m must be >= 1")

    @property
    def alpha(self):
        return self.m / self.n

    @property
    def storage_bits(self):
        """Solution bits actually used: s * n."""
        return self.s * self.n

    @property
    def payload_bytes(self):
        return self.n * words_per_row(self.s) * 8


class NaeSatFilter:
    def __init__(self, header: FilterHeader, matrix: SolutionMatrix):
        if matrix.n != header.n or matrix.s != header.s:
            raise ContractError("solution matrix dimensions disagree with the header")
        self.header = header
        self.matrix = matrix
        self._masks = lane_masks(header.s)

    @property
    def k(self):
        return self.header.k

    @property
    def n(self):
        return self.header.n

    @property
    def m(self):
        return self.header.m

    @property
    def s(self):
        return self.header.s

    @property
    def hash_spec(self):
        return self.header.hash_spec

    def solutions(self):
        return self.matrix.unpack()

    def truncated(self, s):
        """A filter keeping only the first ``s`` stored solutions."""
        if not 1 <= s <= self.s:
            raise ContractError(f"s must lie in [1, {self.s}]")
        return NaeSatFilter(replace(self.header, s=s), SolutionMatrix.pack(self.solutions()[:s]))

    # -- queries ---------------------------------------------------------------

    def clause_for(self, key):
        return derive_clause(key_bytes(key), self.hash_spec, self.n, self.k)

    def _evaluate(self, vars_, neg, nae):
        lits = self.matrix.words[vars_]                       # (N, k, W)
        lits = lits ^ (neg[..., None].astype(np.uint64) * np.uint64(0xFFFFFFFFFFFFFFFF))
        any_true = np.bitwise_or.reduce(lits, axis=1)
        if nae:
            all_true = np.bitwise_and.reduce(lits, axis=1)
            passed = any_true & ~all_true
        else:
            passed = any_true
        return np.all((passed & self._masks) == self._masks, axis=1)

    def query(self, key, nae=True) -> bool:
        """True means *maybe*, False means definitely not a member."""
        c = self.clause_for(key)
        vars_ = np.array([c.vars])
        neg = np.array([[lit.negated for lit in c.literals]])
        return bool(self._evaluate(vars_, neg, nae)[0])

    def query_many(self, keys, nae=True, chunk=1 << 16):
        vars_, neg = derive_clause_arrays(keys, self.hash_spec, self.n, self.k)
        out = np.empty(len(vars_), dtype=bool)
        for lo in range(0, len(vars_), chunk):
            out[lo:lo + chunk] = self._evaluate(vars_[lo:lo + chunk], neg[lo:lo + chunk], nae)
        return out

    def query_batch(self, keys, nae=True):
        """Vectorised query; returns ``(answers, total_seconds, seconds_per_key)``."""
        t0 = time.perf_counter()
        out = self.query_many(keys, nae=nae)
        total = time.perf_counter() - t0
        return out, total, (total / len(out) if len(out) else 0.0)

    def scalar_query_reference(self, key, nae=True) -> bool:
        """Check the derived clause against each stored solution in turn."""
        c = self.clause_for(key)
        check = eval_clause_nae if nae else eval_clause_sat
        return all(check(c, a) for a in self.matrix.unpack())

    # -- serialisation ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        h = self.header
        head = _HEADER.pack(MAGIC, h.version, h.k, h.n, h.m, h.s,
                            h.hash_spec.algorithm_id, int(h.hash_spec.mode),
                            h.hash_spec.base_seed, ENGINE_IDS[h.build_engine])
        head = head.ljust(HEADER_SIZE, b"\0")
        return head + self.matrix.words.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes):
        data = bytes(data)
        if len(data) < HEADER_SIZE:
            raise FilterFormatError(f"truncated header: {len(data)} < {HEADER_SIZE} bytes")
        (magic, version, k, n, m, s, alg, mode, seed, engine) = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise FilterFormatError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FilterFormatError(f"unsupported version {version}")
        if any(data[_HEADER.size:HEADER_SIZE]):
            raise FilterFormatError("reserved header bytes are not zero")
        if alg not in KNOWN_ALGORITHMS:
            raise FilterFormatError(f"unknown hash algorithm id {alg}")
        if mode not in {m_.value for m_ in HashMode}:
            raise FilterFormatError(f"unknown hash mode {mode}")
        if engine not in ENGINE_NAMES:
            raise FilterFormatError(f"unknown build engine id {engine}")
        if s < 1:
            raise FilterFormatError("header claims s=0")
        if m < 1:
            raise FilterFormatError("header claims m=0")
        if k < 2 or n < k:
            raise FilterFormatError(f"inconsistent dimensions n={n}, k={k}")
        w = words_per_row(s)
        expected = HEADER_SIZE + n * w * 8
        if len(data) != expected:
            raise FilterFormatError(f"payload size {len(data)} != expected {expected}")
        words = np.frombuffer(data, dtype="<u8", offset=HEADER_SIZE).reshape(n, w)
        try:
            matrix = SolutionMatrix(words.astype(np.uint64), s)
        except ContractError as exc:
            raise FilterFormatError(str(exc)) from None
        header = FilterHeader(k, n, m, s, HashSpec(alg, HashMode(mode), seed), ENGINE_NAMES[engine], version)
        return cls(header, matrix)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def __eq__(self, other):
        return (isinstance(other, NaeSatFilter) and self.header == other.header
                and self.matrix == other.matrix)

    def __repr__(self):
        h = self.header
        return f"NaeSatFilter(k={h.k}, n={h.n}, m={h.m}, s={h.s}, mode={h.hash_spec.mode.name})"


def serialize(flt: NaeSatFilter) -> bytes:
    return flt.to_bytes()


def deserialize(data: bytes) -> NaeSatFilter:
    return NaeSatFilter.from_bytes(data)


def from_solutions(keys, k, n, solutions, hash_spec=HashSpec(), engine="imported", cnf=None):
    """Pack externally obtained solutions after checking each against the key CNF."""
    from .cnf import cost_nae

    f = cnf if cnf is not None else build_cnf(keys, hash_spec, n, k)
    for i, a in enumerate(solutions):
        if len(a) != n:
            raise ContractError(f"solution {i} has {len(a)} bits, expected {n}")
        if cost_nae(f, a) != 0:
            raise ContractError(f"solution {i} violates {cost_nae(f, a)} clauses")
    header = FilterHeader(k, n, f.m, len(solutions), hash_spec, engine)
    return NaeSatFilter(header, SolutionMatrix.pack(list(solutions)))


def build(keys, k: int, n: int, s: int, hash_spec: HashSpec = HashSpec(),
          engine: str = WALKSAT, budget: Optional[SolverBudget] = None, seed: int = 0,
          min_hamming_frac: float = 0.0, noise: float = DEFAULT_NOISE,
          ladder: Optional[TemperatureLadder] = None, max_attempts=None, workers=None) -> NaeSatFilter:
    """Build a filter over ``keys`` (byte strings, or a uint64 array of 8-byte keys).

    Derives one clause per key, collects ``s`` NAE solutions of the resulting
    formula and packs them.
    """
    if len(keys) == 0:
        raise ContractError("cannot build a filter over an empty key set")
    if k < 2 or n < k:
        raise ContractError(f"need n >= k >= 2 (got n={n}, k={k})")
    if s < 1:
        raise ContractError("s must be >= 1")
    f = build_cnf(keys, hash_spec, n, k)
    ceiling = nae_threshold_estimate(k)
    if f.alpha > ceiling:
        warnings.warn(f"alpha={f.alpha:.2f} exceeds the estimated NAE threshold {ceiling:.2f} "
                      f"for k={k}; solving will probably fail", RuntimeWarning, stacklevel=2)
    try:
        sols = collect_solutions(f, s, seed, engine, budget, min_hamming_frac, noise=noise,
                                 ladder=ladder, max_attempts=max_attempts, workers=workers)
    except CollectError as exc:
        raise BuildError(f"filter build failed: {exc}", exc.solutions, f.alpha, exc.attempts) from exc
    header = FilterHeader(k, n, f.m, s, hash_spec, engine)
    return NaeSatFilter(header, SolutionMatrix.pack(sols))
