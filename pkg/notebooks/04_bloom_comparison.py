"""Same key set, same number of bits: tuned Bloom filter vs NAE-SAT filter."""
import numpy as np

from naefilter import BloomFilter, build
from naefilter.bloom import bloom_efficiency
from naefilter.metrics import efficiency, measure_fpr

m, k, s, n = 1 << 14, 5, 22, 2000
members = np.random.default_rng(4).integers(0, 2 ** 64, m, dtype=np.uint64)
bits = s * n

bf = BloomFilter.tuned(bits, m).insert_many(members)
b = measure_fpr(bf, 10 ** 6, rng_seed=1, member_set=members)
print(f"bloom  j={bf.j}  fpr={b.estimate:.4f}  efficiency={bloom_efficiency(b.estimate, bits, m):.4f}")

flt = build(members, k, n, s, seed=4)
e = measure_fpr(flt, 10 ** 6, rng_seed=2, member_set=members)
print(f"naesat k={k} fpr={e.estimate:.4f}  efficiency={efficiency(e.estimate, n, s, m):.4f}")
