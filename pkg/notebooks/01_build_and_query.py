"""Build a small filter, query members and strangers, save and reload it.

Run: python3 notebooks/01_build_and_query.py
"""
import tempfile
from pathlib import Path

import numpy as np

from naefilter import HashSpec, NaeSatFilter, build
from naefilter.metrics import fpr_theory_nae

rng = np.random.default_rng(1)
members = rng.integers(0, 2 ** 64, 4096, dtype=np.uint64)

# k=5 clauses at four clauses per variable, 22 stored solutions
flt = build(members, k=5, n=1024, s=22, hash_spec=HashSpec(base_seed=7), seed=1)
print(flt)

# every member answers "maybe"
assert flt.query_many(members).all()

strangers = rng.integers(0, 2 ** 64, 100_000, dtype=np.uint64)
rate = flt.query_many(strangers).mean()
print(f"stranger maybe-rate {rate:.4f}, theory {fpr_theory_nae(5, 22):.4f}")

# one key at a time works too, with ints or bytes
print("member 0:", flt.query(int(members[0])), " b'hello':", flt.query(b"hello"))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.naef"
    flt.save(path)
    print(f"saved {path.stat().st_size} bytes")
    assert NaeSatFilter.load(path) == flt
