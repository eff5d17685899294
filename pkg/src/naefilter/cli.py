"""Command-line interface.

Exit codes: 0 success, 1 usage or format error, 2 solver or verification failure.
"""

import argparse
import sys
import warnings

import numpy as np

from . import metrics
from .cnf import Assignment, ContractError, write_dimacs
from .filter import (HEADER_SIZE, BuildError, FilterFormatError, NaeSatFilter, build,
                     from_solutions)
from .keyhash import HashMode, HashSpec, build_cnf
from .solvers import ENGINES, WALKSAT
from .transform import to_sat_cnf

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_keys(path, raw=False, key_bytes=8):
    """Newline-delimited hex keys, or a raw binary file of fixed-width keys."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read keys file: {exc}") from None
    if raw:
        if key_bytes < 1 or len(data) % key_bytes:
            raise UsageError(f"raw keys file size {len(data)} is not a multiple of {key_bytes}")
        return [data[i:i + key_bytes] for i in range(0, len(data), key_bytes)]
    keys = []
    for lineno, line in enumerate(data.decode("ascii", errors="replace").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            keys.append(bytes.fromhex(line))
        except ValueError:
            raise UsageError(f"keys file line {lineno}: not a hex string") from None
    return keys


def write_keys(path, keys):
    with open(path, "w") as fh:
        for k in keys:
            fh.write(bytes(k).hex() + "\n")


def _hash_spec(args):
    mode = HashMode.ONE if args.hash_mode == "one" else HashMode.TWO
    return HashSpec(mode=mode, base_seed=args.hash_seed)


def _load_filter(path):
    try:
        return NaeSatFilter.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read filter: {exc}") from None


def summary_lines(flt):
    h = flt.header
    theory = metrics.fpr_theory_nae(h.k, h.s)
    eff = metrics.efficiency_theory(h.k, h.n, h.m)
    file_bytes = HEADER_SIZE + h.payload_bytes
    return [
        f"k={h.k} n={h.n} m={h.m} s={h.s} alpha={h.alpha:.4f}",
        f"hash: algorithm={h.hash_spec.algorithm_id} mode={h.hash_spec.mode.name.lower()} "
        f"seed={h.hash_spec.base_seed} engine={h.build_engine}",
        f"storage: {h.storage_bits} bits ({h.storage_bits / 8:.0f} bytes) of solutions; "
        f"file {file_bytes} bytes",
        f"theoretical FPR (NAE): {theory:.6g}",
        f"efficiency: {eff:.6g}",
    ]


def cmd_build(args):
    keys = read_keys(args.keys, args.raw, args.key_bytes)
    if not keys:
        raise UsageError("keys file is empty")
    m = len(keys)
    if (args.n is None) == (args.alpha is None):
        raise UsageError("give exactly one of --n or --alpha")
    n = args.n if args.n is not None else int(round(m / args.alpha))
    if args.k < 2 or n < args.k or args.s < 1:
        raise UsageError(f"need n >= k >= 2 and s >= 1 (got k={args.k}, n={n}, s={args.s})")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        flt = build(keys, args.k, n, args.s, _hash_spec(args), engine=args.engine, seed=args.seed)
    flt.save(args.out)
    for line in summary_lines(flt):
        print(line)
    return EXIT_OK


def cmd_query(args):
    flt = _load_filter(args.filter)
    if args.key is not None:
        try:
            keys = [bytes.fromhex(args.key)]
        except ValueError:
            raise UsageError("--key must be hex") from None
    else:
        keys = read_keys(args.keys, args.raw, args.key_bytes)
    answers = flt.query_many(keys, nae=not args.sat) if keys else []
    for a in answers:
        print("maybe" if a else "no")
    return EXIT_OK


def parse_s_range(text):
    """``"1:8"`` or ``"1-8"`` (inclusive) or a comma list ``"8,16,32"``."""
    try:
        if "," in text:
            vals = [int(t) for t in text.split(",")]
        else:
            sep = ":" if ":" in text else "-"
            if sep in text:
                lo, hi = (int(t) for t in text.split(sep))
                vals = list(range(lo, hi + 1))
            else:
                vals = [int(text)]
    except ValueError:
        raise UsageError(f"invalid --s-range {text!r}") from None
    if not vals or min(vals) < 1:
        raise UsageError(f"invalid --s-range {text!r}")
    return sorted(set(vals))


def random_keys(count, seed):
    return np.random.default_rng(seed).integers(0, 2 ** 64, count, dtype=np.uint64, endpoint=False)


def cmd_bench_fpr(args):
    s_values = parse_s_range(args.s_range)
    if args.m < 1 or args.alpha <= 0 or args.trials < 1 or args.k < 2:
        raise UsageError("need m >= 1, alpha > 0, trials >= 1, k >= 2")
    n = int(round(args.m / args.alpha))
    if n < args.k:
        raise UsageError(f"alpha too large: n={n} < k={args.k}")
    keys = np.unique(random_keys(args.m, args.seed))
    modes = ["one", "two"] if args.compare_hash_modes else [args.hash_mode]
    rows = []
    for mode in modes:
        spec = HashSpec(mode=HashMode.ONE if mode == "one" else HashMode.TWO, base_seed=args.hash_seed)
        full = build(keys, args.k, n, max(s_values), spec, engine=args.engine, seed=args.seed)
        for s in s_values:
            flt = full.truncated(s)
            est = metrics.measure_fpr(flt, args.trials, rng_seed=args.seed + 1, member_set=keys)
            rows.append(metrics.fpr_row(args.k, s, n, len(keys), est,
                                        hash_mode=mode if args.compare_hash_modes else None))
    params = dict(k=args.k, m=len(keys), n=n, alpha=args.alpha, s_range=args.s_range,
                  trials=args.trials, engine=args.engine, seed=args.seed,
                  hash_seed=args.hash_seed, hash_modes="+".join(modes))
    _emit_csv(args.csv, rows, params)
    return EXIT_OK


def _emit_csv(path, rows, params, fields=None):
    if path in (None, "-"):
        metrics.write_csv(sys.stdout, rows, params, fields)
    else:
        with open(path, "w", newline="") as fh:
            metrics.write_csv(fh, rows, params, fields)


def cmd_bench_query(args):
    if args.num_keys < 1:
        raise UsageError("--num-keys must be >= 1")
    flt = _load_filter(args.filter)
    keys = random_keys(args.num_keys, args.seed)
    answers, total, per_key = flt.query_batch(keys)
    maybe = int(np.count_nonzero(answers))
    print(f"queried {len(keys)} keys in {total:.4f} s ({per_key * 1e9:.1f} ns/query); "
          f"maybe={maybe} no={len(keys) - maybe}")
    row = dict(s=flt.s, total_t=f"{total:.6g}", t_per_query=f"{per_key:.6g}",
               maybe=maybe, no=len(keys) - maybe)
    params = dict(filter=args.filter, k=flt.k, n=flt.n, m=flt.m, num_keys=args.num_keys, seed=args.seed)
    if args.csv:
        _emit_csv(args.csv, [row], params, fields=["s", "total_t", "t_per_query", "maybe", "no"])
    return EXIT_OK


def cmd_export_cnf(args):
    keys = read_keys(args.keys, args.raw, args.key_bytes)
    if not keys:
        raise UsageError("keys file is empty")
    if args.k < 2 or args.n < args.k:
        raise UsageError("need n >= k >= 2")
    f = build_cnf(keys, _hash_spec(args), args.n, args.k)
    if args.nae_encoded:
        f = to_sat_cnf(f)
    comments = [f"naefilter k={args.k} n={args.n} m={len(keys)} hash_mode={args.hash_mode} "
                f"hash_seed={args.hash_seed} nae_encoded={int(args.nae_encoded)}"]
    with open(args.out, "w") as fh:
        fh.write(write_dimacs(f, comments))
    return EXIT_OK


def read_solutions(path, n):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read solutions file: {exc}") from None
    sols = []
    for i, line in enumerate(l.strip() for l in lines):
        if not line or line.startswith("#"):
            continue
        if len(line) != n or any(ch not in "01" for ch in line):
            raise ContractError(f"solution line {i + 1}: expected {n} characters of 0/1")
        sols.append(Assignment.from_string(line))
    if not sols:
        raise ContractError("no solutions in file")
    return sols


def cmd_import_solutions(args):
    keys = read_keys(args.keys, args.raw, args.key_bytes)
    if not keys:
        raise UsageError("keys file is empty")
    if args.k < 2 or args.n < args.k:
        raise UsageError("need n >= k >= 2")
    sols = read_solutions(args.solutions, args.n)
    flt = from_solutions(keys, args.k, args.n, sols, _hash_spec(args))
    flt.save(args.out)
    for line in summary_lines(flt):
        print(line)
    return EXIT_OK


def cmd_info(args):
    flt = _load_filter(args.filter)
    for line in summary_lines(flt):
        print(line)
    return EXIT_OK


def _add_key_source(p):
    p.add_argument("--raw", action="store_true", help="keys file holds raw fixed-width binary keys")
    p.add_argument("--key-bytes", type=int, default=8, help="width of raw keys (default 8)")


def _add_hash(p):
    p.add_argument("--hash-mode", choices=["one", "two"], default="one")
    p.add_argument("--hash-seed", type=int, default=0)


def make_parser():
    parser = _Parser(prog="naefilter", description="NAE-SAT probabilistic membership filters")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build a filter from a keys file")
    p.add_argument("--keys", required=True)
    _add_key_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--engine", choices=list(ENGINES), default=WALKSAT)
    p.add_argument("--seed", type=int, default=0)
    _add_hash(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query keys against a filter")
    p.add_argument("--filter", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--key", help="a single hex key")
    g.add_argument("--keys", help="keys file")
    _add_key_source(p)
    p.add_argument("--sat", action="store_true", help="plain-SAT query semantics instead of NAE")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench-fpr", help="measured vs theoretical FPR per solution count")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s-range", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--engine", choices=list(ENGINES), default=WALKSAT)
    p.add_argument("--seed", type=int, default=0)
    _add_hash(p)
    p.add_argument("--compare-hash-modes", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench_fpr)

    p = sub.add_parser("bench-query", help="time a batch of random queries")
    p.add_argument("--filter", required=True)
    p.add_argument("--num-keys", type=int, default=1 << 17)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench_query)

    p = sub.add_parser("export-cnf", help="write the key formula as DIMACS")
    p.add_argument("--keys", required=True)
    _add_key_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nae-encoded", action="store_true", help="add complementary penalty clauses")
    _add_hash(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_cnf)

    p = sub.add_parser("import-solutions", help="pack externally found solutions into a filter")
    p.add_argument("--keys", required=True)
    _add_key_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--solutions", required=True)
    _add_hash(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_solutions)

    p = sub.add_parser("info", help="print a filter's header and derived figures")
    p.add_argument("--filter", required=True)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FilterFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BuildError as exc:
        print(f"error: {exc} (achieved s={exc.achieved_s}, alpha={exc.alpha:.4f})", file=sys.stderr)
        return EXIT_FAILURE
    except ContractError as exc:
        if args.command == "import-solutions":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAILURE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
