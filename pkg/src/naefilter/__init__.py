"""NAE-SAT based probabilistic membership filters."""

from .bloom import BloomFilter, bloom_efficiency, bloom_insert, bloom_query
from .cnf import (Assignment, Clause, Cnf, ContractError, DimacsError, Literal,
                  brute_force_nae_solutions, brute_force_sat_solutions, cost_nae, cost_sat,
                  eval_clause_nae, eval_clause_sat, parse_dimacs, write_dimacs)
from .filter import (BuildError, FilterFormatError, FilterHeader, NaeSatFilter, SolutionMatrix,
                     build, deserialize, from_solutions, serialize)
from .keyhash import HashMode, HashSpec, KeyDigest, build_cnf, derive_clause, digest
from .metrics import (efficiency, efficiency_theory, fpr_theory_nae, fpr_theory_sat,
                      hamming_stats, measure_fpr, required_solutions)
from .solvers import (CollectError, SolverBudget, SolverReport, TemperatureLadder,
                      collect_solutions, pt_solve, walksat_solve)
from .transform import is_penalty_paired, to_sat_cnf

__version__ = "0.1.0"
