"""Hand a filter's formula to an outside solver, then import its answers.

Here the "outside solver" is brute force on a tiny instance; any DIMACS
solver works the same way. The CLI offers the same round trip through
``naefilter export-cnf`` and ``naefilter import-solutions``.
"""
import numpy as np

from naefilter import HashSpec, build_cnf, brute_force_sat_solutions, from_solutions, to_sat_cnf
from naefilter.cnf import parse_dimacs, write_dimacs

members = np.random.default_rng(6).integers(0, 2 ** 64, 24, dtype=np.uint64)
spec = HashSpec()
f = build_cnf(members, spec, n=16, k=3)

# NAE constraints become plain SAT once every clause gets its complemented twin
text = write_dimacs(to_sat_cnf(f), comments=["nae-encoded"])
print(text.splitlines()[1])

sols = brute_force_sat_solutions(parse_dimacs(text))
keep = sols[:: max(1, len(sols) // 6)][:6]
print(f"{len(sols)} solutions; keeping {len(keep)}")
flt = from_solutions(members, 3, 16, keep, hash_spec=spec)
assert flt.query_many(members).all()
print(flt)
