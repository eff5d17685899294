"""Formula and assignment model, SAT/NAE semantics, brute-force oracle, DIMACS I/O.

Variables are 0-indexed everywhere except in DIMACS text, which is 1-indexed.
A :class:`Cnf` keeps its clauses as two read-only ``(m, k)`` arrays (variable
indices and negation flags) so that evaluation over large formulas stays in
numpy; :class:`Clause` and :class:`Literal` objects are materialised on demand.
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

BRUTE_FORCE_MAX_VARS = 24


class ContractError(ValueError):
    """An operation was called outside its precondition."""


class DimacsError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def complement(self):
        return Literal(self.var, not self.negated)

    def __str__(self):
        return f"{'~' if self.negated else ''}x{self.var}"


@dataclass(frozen=True)
class Clause:
    literals: tuple

    def __post_init__(self):
        lits = tuple(self.literals)
        object.__setattr__(self, "literals", lits)
        if not lits:
            raise ContractError("clause must contain at least one literal")
        vs = [lit.var for lit in lits]
        if min(vs) < 0:
            raise ContractError("negative variable index")
        if len(set(vs)) != len(vs):
            raise ContractError(f"clause repeats a variable: {vs}")

    @classmethod
    def of(cls, *codes):
        """Build from signed 1-based-free codes: ``Clause.of(0, ~1)`` is (x0 v ~x1)."""
        return cls(tuple(Literal(~c, True) if c < 0 else Literal(c, False) for c in codes))

    @property
    def k(self):
        return len(self.literals)

    @property
    def vars(self):
        return tuple(lit.var for lit in self.literals)

    def complement(self):
        return Clause(tuple(lit.complement() for lit in self.literals))

    def __str__(self):
        return "(" + " v ".join(str(lit) for lit in self.literals) + ")"


class Assignment:
    """A truth assignment over ``n`` variables; bit ``i`` is the value of ``x_i``."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ContractError("assignment bits must be 0 or 1")
        arr.setflags(write=False)
        self.bits = arr

    @classmethod
    def from_string(cls, text):
        text = text.strip()
        if any(ch not in "01" for ch in text):
            raise ContractError("assignment string may only contain 0 and 1")
        return cls([ch == "1" for ch in text])

    def to_string(self):
        return "".join("1" if b else "0" for b in self.bits)

    def complement(self):
        return Assignment(1 - self.bits)

    def __len__(self):
        return self.bits.size

    def __getitem__(self, i):
        return int(self.bits[i])

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"Assignment('{self.to_string()}')"


class Cnf:
    """An immutable uniform-width CNF formula over ``n`` variables."""

    __slots__ = ("n", "k", "vars", "neg")

    def __init__(self, n, vars, neg, k=None):
        vars = np.array(vars, dtype=np.int64)
        neg = np.array(neg, dtype=bool)
        if vars.ndim == 1 and vars.size == 0:
            vars = vars.reshape(0, k or 0)
            neg = neg.reshape(0, k or 0)
        if vars.ndim != 2 or vars.shape != neg.shape:
            raise ContractError("clause arrays must be (m, k) and equal in shape")
        m, width = vars.shape
        if k is not None and m and width != k:
            raise ContractError(f"clause width {width} does not match k={k}")
        if n < 1:
            raise ContractError("a formula needs at least one variable")
        if m:
            if width < 1:
                raise ContractError("clause width must be >= 1")
            if vars.min() < 0 or vars.max() >= n:
                raise ContractError(f"variable index out of range [0, {n})")
            srt = np.sort(vars, axis=1)
            if width > 1 and np.any(srt[:, 1:] == srt[:, :-1]):
                raise ContractError("a clause repeats a variable")
        vars.setflags(write=False)
        neg.setflags(write=False)
        self.n = int(n)
        self.k = int(width if m else (k or 0))
        self.vars = vars
        self.neg = neg

    @classmethod
    def from_clauses(cls, n, clauses: Iterable[Clause], k=None):
        clauses = list(clauses)
        widths = {c.k for c in clauses}
        if len(widths) > 1:
            raise ContractError(f"mixed clause widths {sorted(widths)}; formulas must be uniform")
        width = widths.pop() if widths else (k or 0)
        vars = [[lit.var for lit in c.literals] for c in clauses]
        neg = [[lit.negated for lit in c.literals] for c in clauses]
        return cls(n, np.array(vars, dtype=np.int64).reshape(len(clauses), width),
                   np.array(neg, dtype=bool).reshape(len(clauses), width), k=width)

    @property
    def m(self):
        return self.vars.shape[0]

    @property
    def alpha(self):
        return self.m / self.n

    @property
    def clauses(self) -> List[Clause]:
        return [self.clause(i) for i in range(self.m)]

    def clause(self, i):
        return Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(self.vars[i], self.neg[i])))

    def __len__(self):
        return self.m

    def __eq__(self, other):
        if not isinstance(other, Cnf):
            return NotImplemented
        if self.m == 0 or other.m == 0:
            # an empty formula has no meaningful width
            return self.n == other.n and self.m == other.m
        return (self.n == other.n and self.k == other.k
                and np.array_equal(self.vars, other.vars)
                and np.array_equal(self.neg, other.neg))

    def __repr__(self):
        return f"Cnf(n={self.n}, m={self.m}, k={self.k})"


def _check_clause(c, a):
    if max(c.vars) >= len(a):
        raise ContractError(f"clause {c} references a variable beyond n={len(a)}")


def _literal_values(c, a):
    return [a.bits[lit.var] ^ lit.negated for lit in c.literals]


def eval_clause_sat(c: Clause, a: Assignment) -> bool:
    _check_clause(c, a)
    return any(_literal_values(c, a))


def eval_clause_nae(c: Clause, a: Assignment) -> bool:
    _check_clause(c, a)
    if c.k < 2:
        raise ContractError("NAE semantics need clauses of width >= 2")
    vals = _literal_values(c, a)
    return any(vals) and not all(vals)


def _true_counts(f, bits):
    if len(bits) != f.n:
        raise ContractError(f"assignment has {len(bits)} bits, formula has n={f.n}")
    lits = bits[f.vars].astype(bool) ^ f.neg
    return lits.sum(axis=1)


def clause_nae_mask(f: Cnf, a: Assignment):
    """Boolean array, True where clause i is NAE-satisfied."""
    t = _true_counts(f, a.bits)
    return (t > 0) & (t < f.k)


def cost_nae(f: Cnf, a: Assignment) -> int:
    """Number of clauses that are not NAE-satisfied (0 for a valid NAE solution)."""
    if f.m == 0:
        if len(a) != f.n:
            raise ContractError(f"assignment has {len(a)} bits, formula has n={f.n}")
        return 0
    if f.k < 2:
        raise ContractError("NAE semantics need clauses of width >= 2")
    return int(np.count_nonzero(~clause_nae_mask(f, a)))


def cost_sat(f: Cnf, a: Assignment) -> int:
    """Number of clauses with no true literal."""
    if f.m == 0:
        if len(a) != f.n:
            raise ContractError(f"assignment has {len(a)} bits, formula has n={f.n}")
        return 0
    return int(np.count_nonzero(_true_counts(f, a.bits) == 0))


def _enumerate(f, keep, chunk_bits=20):
    n = f.n
    if n > BRUTE_FORCE_MAX_VARS:
        raise ContractError(f"brute force refuses n={n} > {BRUTE_FORCE_MAX_VARS}")
    total = 1 << n
    # x0 is the most significant bit so results come out in lexicographic order
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    found = []
    step = 1 << min(n, chunk_bits)
    for start in range(0, total, step):
        codes = np.arange(start, min(total, start + step), dtype=np.int64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(bool)
        ok = np.ones(codes.size, dtype=bool)
        for i in range(f.m):
            lits = bits[:, f.vars[i]] ^ f.neg[i]
            ok &= keep(lits)
            if not ok.any():
                break
        found.extend(Assignment(row) for row in bits[ok])
    return found


def brute_force_nae_solutions(f: Cnf) -> List[Assignment]:
    """Every assignment with zero NAE cost, by exhaustive enumeration (n <= 24)."""
    if f.m and f.k < 2:
        raise ContractError("NAE semantics need clauses of width >= 2")
    return _enumerate(f, lambda lits: lits.any(axis=1) & ~lits.all(axis=1))


def brute_force_sat_solutions(f: Cnf) -> List[Assignment]:
    """Every assignment satisfying ``f`` under plain SAT semantics (n <= 24)."""
    return _enumerate(f, lambda lits: lits.any(axis=1))


def parse_dimacs(text: str) -> Cnf:
    n = m = None
    clauses = []
    current = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if n < 1 or m < 0:
                raise DimacsError("header counts out of range", lineno)
            continue
        if n is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                try:
                    clauses.append(Clause(tuple(current)))
                except ContractError as exc:
                    raise DimacsError(str(exc), lineno) from None
                current = []
                continue
            if abs(lit) > n:
                raise DimacsError(f"literal {lit} exceeds n={n}", lineno)
            current.append(Literal(abs(lit) - 1, lit < 0))
        last_line = lineno
    if n is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("unterminated clause at end of input", last_line)
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    try:
        return Cnf.from_clauses(n, clauses)
    except ContractError as exc:
        raise DimacsError(str(exc)) from None


def write_dimacs(f: Cnf, comments: Sequence[str] = ()) -> str:
    out = [f"c {line}" for line in comments]
    out.append(f"p cnf {f.n} {f.m}")
    signed = np.where(f.neg, -(f.vars + 1), f.vars + 1)
    for row in signed:
        out.append(" ".join(str(int(v)) for v in row) + " 0")
    return "\n".join(out) + "\n"
