"""NAE-CNF -> SAT-CNF rewrite via complementary penalty clauses.

A clause is NAE-satisfied exactly when both it and its all-complemented twin
are SAT-satisfied, so interleaving every clause with its twin yields a plain
CNF whose models are the NAE models of the input.
"""

import numpy as np

from .cnf import Cnf, ContractError


def to_sat_cnf(f: Cnf) -> Cnf:
    if f.m == 0:
        return Cnf(f.n, np.zeros((0, f.k), dtype=np.int64), np.zeros((0, f.k), dtype=bool), k=f.k)
    if f.k < 2:
        raise ContractError("penalty encoding needs clause width k >= 2")
    if __debug__ and is_penalty_paired(f):
        raise ContractError("formula is already penalty-encoded")
    vars_ = np.repeat(f.vars, 2, axis=0)
    neg = np.repeat(f.neg, 2, axis=0)
    neg[1::2] = ~neg[1::2]
    return Cnf(f.n, vars_, neg, k=f.k)


def is_penalty_paired(f: Cnf) -> bool:
    """True iff the clauses come in adjacent (clause, complement) pairs."""
    if f.m % 2:
        return False
    if f.m == 0:
        return True
    a_vars, b_vars = f.vars[0::2], f.vars[1::2]
    a_neg, b_neg = f.neg[0::2], f.neg[1::2]
    return bool(np.array_equal(a_vars, b_vars) and np.all(a_neg != b_neg))
