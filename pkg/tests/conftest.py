import random

import numpy as np
import pytest
from hypothesis import strategies as st

from naefilter.cnf import Assignment, Clause, Cnf, Literal


def random_cnf(rng, n, m, k):
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(n), k)
        clauses.append(Clause(tuple(Literal(v, rng.random() < 0.5) for v in vs)))
    return Cnf.from_clauses(n, clauses, k=k)


def random_assignment(rng, n):
    return Assignment([rng.random() < 0.5 for _ in range(n)])


@st.composite
def clauses_and_assignments(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(2, n))
    vs = draw(st.permutations(range(n)))[:k]
    signs = draw(st.lists(st.booleans(), min_size=k, max_size=k))
    bits = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return Clause(tuple(Literal(v, s) for v, s in zip(vs, signs))), Assignment(bits)


@st.composite
def small_formulas(draw, max_n=10, max_m=12):
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(2, min(n, 5)))
    m = draw(st.integers(0, max_m))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_cnf(random.Random(seed), n, m, k)


@pytest.fixture
def rng():
    return random.Random(12345)


def random_u64(count, seed):
    return np.random.default_rng(seed).integers(0, 2 ** 64, count, dtype=np.uint64, endpoint=False)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
