"""Stochastic solvers and the multi-solution collection loop.

Two engines are provided:

* :func:`walksat_solve` -- break-count WalkSAT over a plain SAT formula (for
  NAE filters the caller passes the penalty-encoded formula).
* :func:`pt_solve` -- parallel tempering Monte Carlo with Metropolis
  single-flip moves, energy = number of NAE-violated clauses.

The inner loops are numba kernels driven by a splitmix64 generator, so a run
is a pure function of its seed on every platform. Kernels release the GIL,
which lets :func:`collect_solutions` overlap independent solves.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .cnf import Assignment, Cnf, ContractError, cost_nae, cost_sat
from .transform import to_sat_cnf

DEFAULT_NOISE = 0.2
WALKSAT = "walksat"
PARALLEL_TEMPERING = "pt"
ENGINES = (WALKSAT, PARALLEL_TEMPERING)


@dataclass(frozen=True)
class SolverBudget:
    max_steps: int = 200_000
    max_restarts: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")

    def with_seed(self, seed):
        return SolverBudget(self.max_steps, self.max_restarts, seed)


# PT counts whole sweeps rather than single flips, hence the smaller cap.
DEFAULT_WALKSAT_BUDGET = SolverBudget(max_steps=200_000, max_restarts=4)
DEFAULT_PT_BUDGET = SolverBudget(max_steps=3_000, max_restarts=2)


@dataclass(frozen=True)
class TemperatureLadder:
    betas: tuple

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)
        if len(betas) < 2:
            raise ValueError("a ladder needs at least two temperatures")
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be strictly increasing")
        if betas[0] <= 0:
            raise ValueError("betas must be positive")

    @classmethod
    def geometric(cls, beta_min=3.0, beta_max=10.0, count=4):
        return cls(tuple(np.geomspace(beta_min, beta_max, count)))


@dataclass
class SolverReport:
    solution: Optional[Assignment]
    steps_used: int
    restarts_used: int
    final_cost: int

    @property
    def solved(self):
        return self.solution is not None


class CollectError(RuntimeError):
    """Raised when the budget runs out before enough solutions were accepted."""

    def __init__(self, message, solutions, attempts):
        super().__init__(message)
        self.solutions = solutions
        self.attempts = attempts


# --- random numbers ---------------------------------------------------------

@numba.njit(cache=True)
def _next_u64(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _uniform(state):
    return (_next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _below(state, n):
    return np.int64((_next_u64(state) >> np.uint64(11)) % np.uint64(n))


def _occurrences(f):
    flat = f.vars.reshape(-1)
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=f.n)
    ptr = np.zeros(f.n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    clause = (order // f.k).astype(np.int64)
    pos = (order % f.k).astype(np.int64)
    return ptr, clause, pos


# --- WalkSAT ------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _walksat_kernel(n, vars_, neg, ptr, occ_c, occ_p, max_steps, tries, noise, seed, out):
    m, k = vars_.shape
    x = np.zeros(n, dtype=np.uint8)
    numtrue = np.zeros(m, dtype=np.int64)
    unsat = np.zeros(m, dtype=np.int64)
    where = np.full(m, -1, dtype=np.int64)
    state = np.zeros(1, dtype=np.uint64)
    total_steps = 0
    best_cost = m + 1
    for t in range(tries):
        state[0] = np.uint64(seed + t)
        for i in range(n):
            x[i] = np.uint8(_next_u64(state) >> np.uint64(63))
        nunsat = 0
        for c in range(m):
            cnt = 0
            for j in range(k):
                if x[vars_[c, j]] != neg[c, j]:
                    cnt += 1
            numtrue[c] = cnt
            where[c] = -1
            if cnt == 0:
                unsat[nunsat] = c
                where[c] = nunsat
                nunsat += 1
        if nunsat < best_cost:
            best_cost = nunsat
            out[:] = x
        step = 0
        while nunsat > 0 and step < max_steps:
            c = unsat[_below(state, nunsat)]
            if _uniform(state) < noise:
                v = vars_[c, _below(state, k)]
            else:
                lo = m + 1
                nties = 0
                v = -1
                for j in range(k):
                    u = vars_[c, j]
                    b = 0
                    for o in range(ptr[u], ptr[u + 1]):
                        cc = occ_c[o]
                        if numtrue[cc] == 1 and x[u] != neg[cc, occ_p[o]]:
                            b += 1
                    if b < lo:
                        lo = b
                        nties = 1
                        v = u
                    elif b == lo:
                        nties += 1
                        if _below(state, nties) == 0:
                            v = u
            for o in range(ptr[v], ptr[v + 1]):
                cc = occ_c[o]
                if x[v] != neg[cc, occ_p[o]]:
                    numtrue[cc] -= 1
                    if numtrue[cc] == 0:
                        unsat[nunsat] = cc
                        where[cc] = nunsat
                        nunsat += 1
                else:
                    numtrue[cc] += 1
                    if numtrue[cc] == 1:
                        p = where[cc]
                        last = unsat[nunsat - 1]
                        unsat[p] = last
                        where[last] = p
                        where[cc] = -1
                        nunsat -= 1
            x[v] ^= np.uint8(1)
            step += 1
            if nunsat < best_cost:
                best_cost = nunsat
                out[:] = x
        total_steps += step
        if nunsat == 0:
            return total_steps, t, 0
    return total_steps, tries - 1, best_cost


def walksat_solve(f: Cnf, budget: SolverBudget = DEFAULT_WALKSAT_BUDGET,
                  noise: float = DEFAULT_NOISE) -> SolverReport:
    """Search for a SAT model of ``f`` with break-count WalkSAT.

    ``budget.max_steps`` caps flips per try; there are ``max_restarts + 1``
    tries, try ``r`` seeded with ``rng_seed + r``.
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    if f.m == 0:
        return SolverReport(Assignment(np.zeros(f.n, dtype=np.uint8)), 0, 0, 0)
    ptr, occ_c, occ_p = _occurrences(f)
    out = np.zeros(f.n, dtype=np.uint8)
    steps, restarts, best = _walksat_kernel(
        f.n, np.ascontiguousarray(f.vars), np.ascontiguousarray(f.neg).astype(np.uint8),
        ptr, occ_c, occ_p, budget.max_steps, budget.max_restarts + 1, float(noise),
        np.uint64(budget.rng_seed & 0xFFFFFFFFFFFFFFFF), out)
    a = Assignment(out)
    cost = cost_sat(f, a)
    return SolverReport(a if cost == 0 else None, int(steps), int(restarts), cost)


# --- parallel tempering -----------------------------------------------------------

@numba.njit(cache=True)
def swap_acceptance(beta_i, beta_j, e_i, e_j):
    """Probability of exchanging the states held at inverse temperatures beta_i, beta_j."""
    arg = (beta_i - beta_j) * (e_i - e_j)
    if arg >= 0.0:
        return 1.0
    return math.exp(arg)


@numba.njit(cache=True, nogil=True)
def _pt_kernel(n, vars_, neg, ptr, occ_c, occ_p, betas, max_sweeps, tries, seed, out):
    m, k = vars_.shape
    nrep = betas.shape[0]
    maxdeg = 0
    for v in range(n):
        if ptr[v + 1] - ptr[v] > maxdeg:
            maxdeg = ptr[v + 1] - ptr[v]
    boltz = np.empty((nrep, maxdeg + 1))
    for t in range(nrep):
        for d in range(maxdeg + 1):
            boltz[t, d] = math.exp(-betas[t] * d)
    x = np.zeros((nrep, n), dtype=np.uint8)
    numtrue = np.zeros((nrep, m), dtype=np.int64)
    energy = np.zeros(nrep, dtype=np.int64)
    perm = np.zeros(nrep, dtype=np.int64)
    state = np.zeros(1, dtype=np.uint64)
    total = 0
    best = m + 1
    for t in range(tries):
        state[0] = np.uint64(seed + t)
        for r in range(nrep):
            perm[r] = r
            for i in range(n):
                x[r, i] = np.uint8(_next_u64(state) >> np.uint64(63))
            e = 0
            for c in range(m):
                cnt = 0
                for j in range(k):
                    if x[r, vars_[c, j]] != neg[c, j]:
                        cnt += 1
                numtrue[r, c] = cnt
                if cnt == 0 or cnt == k:
                    e += 1
            energy[r] = e
            if e < best:
                best = e
                out[:] = x[r]
            if e == 0:
                return total, t, 0
        for sweep in range(max_sweeps):
            total += 1
            for ti in range(nrep):
                r = perm[ti]
                for _ in range(n):
                    v = _below(state, n)
                    de = 0
                    for o in range(ptr[v], ptr[v + 1]):
                        cc = occ_c[o]
                        cnt = numtrue[r, cc]
                        if x[r, v] != neg[cc, occ_p[o]]:
                            nc = cnt - 1
                        else:
                            nc = cnt + 1
                        if cnt == 0 or cnt == k:
                            de -= 1
                        if nc == 0 or nc == k:
                            de += 1
                    if de > 0 and _uniform(state) >= boltz[ti, de]:
                        continue
                    for o in range(ptr[v], ptr[v + 1]):
                        cc = occ_c[o]
                        if x[r, v] != neg[cc, occ_p[o]]:
                            numtrue[r, cc] -= 1
                        else:
                            numtrue[r, cc] += 1
                    x[r, v] ^= np.uint8(1)
                    energy[r] += de
                    if energy[r] < best:
                        best = energy[r]
                        out[:] = x[r]
                    if energy[r] == 0:
                        return total, t, 0
            for ti in range(nrep - 1):
                ri = perm[ti]
                rj = perm[ti + 1]
                acc = swap_acceptance(betas[ti], betas[ti + 1], float(energy[ri]), float(energy[rj]))
                if acc >= 1.0 or _uniform(state) < acc:
                    perm[ti] = rj
                    perm[ti + 1] = ri
    return total, tries - 1, best


def pt_solve(f: Cnf, budget: SolverBudget = DEFAULT_PT_BUDGET,
             ladder: Optional[TemperatureLadder] = None) -> SolverReport:
    """Search for an NAE model of ``f`` with parallel tempering.

    One step is one sweep (n Metropolis proposals per replica) followed by a
    swap pass over adjacent ladder rungs.
    """
    if f.m and f.k < 2:
        raise ContractError("NAE semantics need clauses of width >= 2")
    ladder = ladder or TemperatureLadder.geometric()
    if f.m == 0:
        return SolverReport(Assignment(np.zeros(f.n, dtype=np.uint8)), 0, 0, 0)
    ptr, occ_c, occ_p = _occurrences(f)
    out = np.zeros(f.n, dtype=np.uint8)
    steps, restarts, best = _pt_kernel(
        f.n, np.ascontiguousarray(f.vars), np.ascontiguousarray(f.neg).astype(np.uint8),
        ptr, occ_c, occ_p, np.asarray(ladder.betas, dtype=np.float64),
        budget.max_steps, budget.max_restarts + 1,
        np.uint64(budget.rng_seed & 0xFFFFFFFFFFFFFFFF), out)
    a = Assignment(out)
    cost = cost_nae(f, a)
    return SolverReport(a if cost == 0 else None, int(steps), int(restarts), cost)


# --- collecting many solutions ----------------------------------------------

def attempt_seed(base_seed, index):
    """Solver seed and complement coin for collection attempt ``index``."""
    words = np.random.SeedSequence([base_seed & 0xFFFFFFFFFFFFFFFF, index]).generate_state(2, np.uint64)
    return int(words[0]), bool(words[1] & np.uint64(1))


def worker_count():
    env = os.environ.get("NAEF_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def folded_distance(a, b):
    d = int(np.count_nonzero(a.bits != b.bits))
    return min(d, len(a) - d)


@dataclass
class _Solver:
    f: Cnf
    engine: str
    budget: SolverBudget
    noise: float
    ladder: Optional[TemperatureLadder]
    sat_f: Optional[Cnf] = field(default=None)

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.engine == WALKSAT and self.f.m:
            self.sat_f = to_sat_cnf(self.f)

    def __call__(self, seed):
        b = self.budget.with_seed(seed)
        if self.engine == WALKSAT:
            return walksat_solve(self.sat_f if self.sat_f is not None else self.f, b, self.noise)
        return pt_solve(self.f, b, self.ladder)


def collect_solutions(f: Cnf, s: int, base_seed: int = 0, engine: str = WALKSAT,
                      budget: Optional[SolverBudget] = None, min_hamming_frac: float = 0.0,
                      noise: float = DEFAULT_NOISE, ladder: Optional[TemperatureLadder] = None,
                      max_attempts: Optional[int] = None, workers: Optional[int] = None):
    """Find ``s`` distinct NAE solutions of ``f``.

    Attempt ``i`` solves with a seed derived from ``(base_seed, i)`` and then
    complements the result on a coin flip drawn from the same seed. A
    candidate is rejected if it repeats an accepted solution exactly or if its
    complement-folded Hamming distance to one is below ``min_hamming_frac * n``.
    Solves may run concurrently, but acceptance is decided in attempt order,
    so the result does not depend on ``workers``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if budget is None:
        budget = DEFAULT_WALKSAT_BUDGET if engine == WALKSAT else DEFAULT_PT_BUDGET
    max_attempts = max_attempts or 2 * s + 8
    workers = workers or worker_count()
    solve = _Solver(f, engine, budget, noise, ladder)
    threshold = min_hamming_frac * f.n
    accepted = []
    seen = set()
    attempt = 0
    failures = 0

    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while len(accepted) < s and attempt < max_attempts:
            wave = list(range(attempt, min(max_attempts, attempt + workers)))
            seeds = [attempt_seed(base_seed, i) for i in wave]
            if pool is not None:
                reports = list(pool.map(solve, [sd for sd, _ in seeds]))
            else:
                reports = [solve(sd) for sd, _ in seeds]
            for (sd, flip), rep in zip(seeds, reports):
                attempt += 1
                if rep.solution is None:
                    failures += 1
                    continue
                a = rep.solution.complement() if flip else rep.solution
                if cost_nae(f, a) != 0:
                    raise AssertionError("solver returned an assignment that is not an NAE solution")
                if a in seen:
                    continue
                if threshold > 0 and any(folded_distance(a, b) < threshold for b in accepted):
                    continue
                accepted.append(a)
                seen.add(a)
                if len(accepted) == s:
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    if len(accepted) < s:
        raise CollectError(
            f"found {len(accepted)} of {s} solutions in {attempt} attempts "
            f"({failures} solver failures, alpha={f.alpha:.3f}, engine={engine}, "
            f"max_steps={budget.max_steps}, max_restarts={budget.max_restarts})",
            accepted, attempt)
    return accepted
