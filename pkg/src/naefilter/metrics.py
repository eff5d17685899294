"""False-positive-rate and efficiency formulas, empirical FPR estimation, diversity stats."""

import csv
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist
from statsmodels.stats.proportion import proportion_confint

from .cnf import ContractError


def _power_fpr(base_miss, s):
    # (1 - base_miss)^s in log space; stays accurate for very large s
    return math.exp(s * math.log1p(-base_miss))


def fpr_theory_sat(k, s):
    """FPR of plain-SAT querying with ``s`` independent solutions."""
    if k < 1 or s < 1:
        raise ValueError("need k >= 1 and s >= 1")
    return _power_fpr(2.0 ** -k, s)


def fpr_theory_nae(k, s):
    """FPR of NAE querying with ``s`` independent solutions."""
    if k < 2:
        raise ValueError("NAE querying needs k >= 2")
    if s < 1:
        raise ValueError("need s >= 1")
    return _power_fpr(2.0 ** (1 - k), s)


def efficiency(fpr, n, s, m):
    """Bits of discrimination per stored bit per key for ``s`` rows of ``n`` bits."""
    if not 0.0 < fpr < 1.0:
        raise ValueError("fpr must lie strictly between 0 and 1")
    if min(n, s, m) < 1:
        raise ValueError("n, s and m must be >= 1")
    return -math.log2(fpr) / (s * n / m)


def efficiency_theory(k, n, m, nae=True):
    """Efficiency at the theoretical FPR; independent of the solution count."""
    miss = 2.0 ** (1 - k) if nae else 2.0 ** -k
    return -math.log2(1.0 - miss) / (n / m)


def required_solutions(k, target_fpr, nae=True):
    """Smallest s whose theoretical FPR does not exceed ``target_fpr``."""
    if not 0.0 < target_fpr < 1.0:
        raise ValueError("target_fpr must lie strictly between 0 and 1")
    fpr = fpr_theory_nae if nae else fpr_theory_sat
    base = 2.0 ** (1 - k) if nae else 2.0 ** -k
    s = max(1, math.ceil(math.log(target_fpr) / math.log1p(-base)))
    while s > 1 and fpr(k, s - 1) <= target_fpr:
        s -= 1
    while fpr(k, s) > target_fpr:
        s += 1
    return s


@dataclass(frozen=True)
class FprEstimate:
    estimate: float
    stderr: float
    ci_lo: float
    ci_hi: float
    trials: int
    hits: int

    @property
    def half_width(self):
        return (self.ci_hi - self.ci_lo) / 2


def wilson(hits, trials, alpha=0.05):
    lo, hi = proportion_confint(hits, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def random_nonmembers(count, rng_seed, member_set=None, chunk=1 << 16):
    """``count`` uniform 64-bit keys, skipping any in ``member_set``.

    Keys are drawn chunk by chunk from generators seeded with
    ``(rng_seed, chunk_index)``, so the stream is fixed for a given seed.
    """
    members = None
    if member_set is not None and len(member_set):
        members = np.unique(np.asarray(list(member_set) if isinstance(member_set, (set, frozenset))
                                       else member_set, dtype=np.uint64))
    out = []
    got = 0
    idx = 0
    while got < count:
        rng = np.random.default_rng([rng_seed & 0xFFFFFFFFFFFFFFFF, idx])
        keys = rng.integers(0, 2 ** 64, size=chunk, dtype=np.uint64, endpoint=False)
        if members is not None:
            keys = keys[~np.isin(keys, members)]
        keys = keys[:count - got]
        out.append(keys)
        got += len(keys)
        idx += 1
    return np.concatenate(out) if out else np.zeros(0, dtype=np.uint64)


def measure_fpr(flt, trials, rng_seed=0, member_set=None, chunk=1 << 16, **query_kw) -> FprEstimate:
    """Maybe-rate of ``flt`` over ``trials`` random non-member 64-bit keys.

    ``flt`` is anything with a vectorised ``query_many(keys)`` (the NAE-SAT
    filter or the Bloom baseline).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    done = 0
    seq = 0
    while done < trials:
        n = min(chunk, trials - done)
        keys = random_nonmembers(n, (rng_seed * 1_000_003 + seq) & 0xFFFFFFFFFFFFFFFF, member_set, chunk=n)
        hits += int(np.count_nonzero(flt.query_many(keys, **query_kw)))
        done += n
        seq += 1
    p = hits / trials
    lo, hi = wilson(hits, trials)
    return FprEstimate(p, math.sqrt(p * (1 - p) / trials), lo, hi, trials, hits)


def within_sigma(estimate: FprEstimate, expected, nsigma=4.0):
    """Is the measured rate within ``nsigma`` binomial standard deviations of ``expected``?"""
    sigma = math.sqrt(expected * (1 - expected) / estimate.trials)
    return abs(estimate.estimate - expected) <= nsigma * sigma


@dataclass(frozen=True)
class HammingStats:
    mean: float
    min: int
    max: int
    folded_mean: float
    n: int

    @property
    def mean_fraction(self):
        return self.mean / self.n


def hamming_stats(solutions) -> HammingStats:
    """Pairwise Hamming distances, raw and folded over complementation."""
    if len(solutions) < 2:
        raise ContractError("need at least two solutions")
    n = len(solutions[0])
    if any(len(a) != n for a in solutions):
        raise ContractError("solutions differ in length")
    bits = np.stack([np.asarray(a.bits, dtype=bool) for a in solutions])
    d = np.rint(pdist(bits, metric="hamming") * n).astype(np.int64)
    folded = np.minimum(d, n - d)
    return HammingStats(float(d.mean()), int(d.min()), int(d.max()), float(folded.mean()), n)


CSV_FIELDS = ("k", "s", "n", "m", "fpr_theory", "fpr_measured", "ci_lo", "ci_hi", "efficiency")


@dataclass(frozen=True)
class FprRow:
    k: int
    s: int
    n: int
    m: int
    fpr_theory: float
    fpr_measured: float
    ci_lo: float
    ci_hi: float
    efficiency: Optional[float]
    hash_mode: Optional[str] = None


def fpr_row(k, s, n, m, est: FprEstimate, nae=True, hash_mode=None):
    theory = fpr_theory_nae(k, s) if nae else fpr_theory_sat(k, s)
    eff = efficiency(est.estimate, n, s, m) if 0 < est.estimate < 1 else None
    return FprRow(k, s, n, m, theory, est.estimate, est.ci_lo, est.ci_hi, eff, hash_mode)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_csv(fh, rows, params: dict, fields=None):
    """Write rows as CSV preceded by a ``#`` comment line recording ``params``."""
    rows = list(rows)
    if fields is None:
        fields = list(CSV_FIELDS)
        if any(getattr(r, "hash_mode", None) for r in rows):
            fields.append("hash_mode")
    fh.write("# " + " ".join(f"{k}={v}" for k, v in params.items()) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        d = asdict(r) if not isinstance(r, dict) else r
        w.writerow([_fmt(d.get(f)) for f in fields])
