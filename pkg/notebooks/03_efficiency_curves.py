"""Theoretical efficiency against clause density, for NAE and plain-SAT querying.

Efficiency only depends on k and n/m, so this is pure arithmetic. Values past the
satisfiability threshold (roughly alpha 2.1 for k=3, 5 for k=4, 10.5 for k=5)
are not reachable, since no solutions exist there.
"""
from naefilter.metrics import efficiency_theory, required_solutions

print("alpha " + " ".join(f"k={k}:nae  k={k}:sat" for k in (3, 4, 5, 6)))
for alpha in (1, 2, 4, 8, 16):
    cells = []
    for k in (3, 4, 5, 6):
        cells.append(f"{efficiency_theory(k, 1, alpha):8.4f} {efficiency_theory(k, 1, alpha, nae=False):8.4f}")
    print(f"{alpha:5d} " + " ".join(cells))

# solutions needed to push the FPR under 25%
for k in (3, 4, 5, 6):
    print(f"k={k}: s={required_solutions(k, 0.25)} (NAE), s={required_solutions(k, 0.25, nae=False)} (SAT)")
