import math
import random

import numpy as np
import pytest

from naefilter.cnf import Assignment, Clause, Cnf, Literal, brute_force_nae_solutions, cost_nae, cost_sat
from naefilter.keyhash import HashSpec, build_cnf
from naefilter.metrics import hamming_stats
from naefilter.solvers import (CollectError, SolverBudget, TemperatureLadder, collect_solutions,
                               pt_solve, swap_acceptance, walksat_solve)
from naefilter.transform import to_sat_cnf

from conftest import random_cnf, random_u64

XOR = Cnf.from_clauses(2, [Clause((Literal(0), Literal(1)))])
XOR_SOLUTIONS = brute_force_nae_solutions(XOR)


def key_formula(n, alpha, k, seed):
    return build_cnf(random_u64(int(round(alpha * n)), seed), HashSpec(), n, k)


class TestWalkSat:
    def test_two_variable_encoding(self):
        rep = walksat_solve(to_sat_cnf(XOR), SolverBudget(100, 0, 3))
        assert rep.solution in XOR_SOLUTIONS
        assert rep.final_cost == 0

    def test_unsatisfiable(self):
        f = Cnf.from_clauses(1, [Clause((Literal(0),)), Clause((Literal(0, True),))])
        rep = walksat_solve(f, SolverBudget(500, 2, 0))
        assert rep.solution is None
        assert rep.final_cost >= 1
        assert rep.steps_used <= 500 * 3

    def test_deterministic(self):
        f = to_sat_cnf(key_formula(200, 6, 5, 1))
        a = walksat_solve(f, SolverBudget(50_000, 1, 9))
        b = walksat_solve(f, SolverBudget(50_000, 1, 9))
        assert a == b

    def test_empty_formula(self):
        rep = walksat_solve(Cnf.from_clauses(4, []))
        assert rep.final_cost == 0 and len(rep.solution) == 4

    def test_solution_verifies(self):
        f = to_sat_cnf(key_formula(300, 8, 5, 2))
        rep = walksat_solve(f, SolverBudget(200_000, 2, 1))
        assert rep.solved and cost_sat(f, rep.solution) == 0

    def test_bad_noise(self):
        with pytest.raises(ValueError):
            walksat_solve(to_sat_cnf(XOR), noise=1.5)


class TestParallelTempering:
    def test_xor(self):
        rep = pt_solve(XOR, SolverBudget(10, 0, 1))
        assert rep.solution in XOR_SOLUTIONS

    def test_two_rung_ladder(self):
        f = random_cnf(random.Random(2), 12, 4, 3)
        rep = pt_solve(f, SolverBudget(50, 0, 0), TemperatureLadder((0.5, 2.0)))
        assert rep.solved and cost_nae(f, rep.solution) == 0

    def test_deterministic(self):
        f = key_formula(150, 8, 5, 4)
        assert pt_solve(f, SolverBudget(300, 0, 5)) == pt_solve(f, SolverBudget(300, 0, 5))

    def test_swap_acceptance_uphill_in_right_direction(self):
        assert swap_acceptance(1.0, 0.5, 3.0, 1.0) == 1.0

    def test_swap_acceptance_reversed(self):
        assert swap_acceptance(1.0, 0.5, 1.0, 3.0) == pytest.approx(math.exp(-1), rel=1e-12)
        assert swap_acceptance(1.0, 0.5, 1.0, 3.0) == pytest.approx(0.3679, abs=1e-4)

    def test_ladder_validation(self):
        with pytest.raises(ValueError):
            TemperatureLadder((1.0,))
        with pytest.raises(ValueError):
            TemperatureLadder((2.0, 1.0))

    def test_monotone_in_alpha(self):
        ladder = TemperatureLadder.geometric()
        budget = SolverBudget(150, 0, 0)

        def success(alpha):
            hits = 0
            for seed in range(20):
                f = key_formula(200, alpha, 5, 100 + seed)
                hits += pt_solve(f, budget.with_seed(seed), ladder).solved
            return hits

        assert success(4) >= success(18)


class TestCollect:
    def test_single(self):
        sols = collect_solutions(XOR, 1, base_seed=0)
        assert sols[0] in XOR_SOLUTIONS

    def test_two_from_one_pair(self):
        sols = collect_solutions(XOR, 2, base_seed=0)
        assert sorted(sols, key=Assignment.to_string) == XOR_SOLUTIONS

    def test_exhaustion_reports_partial(self):
        with pytest.raises(CollectError) as exc:
            collect_solutions(XOR, 3, base_seed=0, max_attempts=12)
        assert len(exc.value.solutions) == 2

    def test_hamming_threshold_enforced(self):
        f = key_formula(200, 5, 5, 8)
        sols = collect_solutions(f, 6, base_seed=1, min_hamming_frac=0.3)
        for i in range(len(sols)):
            for j in range(i):
                d = int(np.count_nonzero(sols[i].bits != sols[j].bits))
                assert min(d, f.n - d) >= 0.3 * f.n

    @pytest.mark.parametrize("engine", ["walksat", "pt"])
    def test_deterministic_and_valid(self, engine):
        f = key_formula(200, 6, 5, 3)
        a = collect_solutions(f, 5, base_seed=11, engine=engine)
        b = collect_solutions(f, 5, base_seed=11, engine=engine, workers=3)
        assert a == b
        assert all(cost_nae(f, x) == 0 for x in a)
        assert len(set(a)) == 5

    def test_decorrelated(self):
        f = key_formula(500, 8, 5, 0)
        stats = hamming_stats(collect_solutions(f, 22, base_seed=2))
        assert 0.4 * 500 <= stats.mean <= 0.6 * 500

    def test_unknown_engine(self):
        with pytest.raises(ValueError):
            collect_solutions(XOR, 1, engine="dimetheus")
