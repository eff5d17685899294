"""Batched query throughput as the number of stored solutions grows.

Each 64 solutions share one machine word per variable, so cost steps up
at multiples of 64 rather than growing smoothly.
"""
import numpy as np

from naefilter import build

m, k = 1 << 14, 5
n = m // 8
members = np.random.default_rng(5).integers(0, 2 ** 64, m, dtype=np.uint64)
probes = np.random.default_rng(6).integers(0, 2 ** 64, 1 << 17, dtype=np.uint64)
full = build(members, k, n, 128, seed=5)

flt = full.truncated(1)
flt.query_batch(probes[:1000])  # warm up
for s in (1, 16, 64, 65, 128):
    _, total, per_key = full.truncated(s).query_batch(probes)
    print(f"s={s:4d}  {total:.3f} s total  {per_key * 1e9:7.1f} ns/query")
