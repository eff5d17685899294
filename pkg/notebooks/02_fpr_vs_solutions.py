"""Measured false-positive rate against the number of stored solutions.

A filter built with many solutions can be truncated to fewer, so one build
covers the whole sweep.
"""
import sys

import numpy as np

from naefilter import build
from naefilter.metrics import fpr_row, measure_fpr, write_csv

k, m = 5, 1 << 12
n = m // 8
members = np.random.default_rng(2).integers(0, 2 ** 64, m, dtype=np.uint64)
full = build(members, k, n, 40, seed=2)

rows = []
for s in (1, 2, 4, 8, 16, 22, 32, 40):
    est = measure_fpr(full.truncated(s), 200_000, rng_seed=s, member_set=members)
    rows.append(fpr_row(k, s, n, m, est))

write_csv(sys.stdout, rows, dict(k=k, m=m, n=n, trials=200_000))
