"""Command-line front end.

    sparsco solve  --m 64 --n 256 --s 5 --seed 7 [--alg gpnp] [--kind cs]
    sparsco solve  --instance file.txt
    sparsco gen    --m 64 --n 256 --s 5 --seed 7 --out file.txt
    sparsco bench  success-rate --n 256 --m 64 --s 5:35:1 --trials 100 --seed 1 --out success.csv
    sparsco bench  sample-sweep --n 256 --s 13 --m-frac 0.08:0.34:0.02 ...
    sparsco bench  scaling --size 500x2000x100 --trials 20 ...
    sparsco bench  qcs --n-values 500 --trials 20 ...

Exit codes: 0 success, 2 usage or input error, 3 solver stall (solve only).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import math
import sys
from dataclasses import asdict
from typing import Optional, Sequence

from . import __version__, bench
from .bench import ALGORITHMS, GPNP_NAME, TrialResult
from .core import ProblemKind
from .instance_io import InstanceFormatError, read_instance, write_instance

EXIT_OK, EXIT_USAGE, EXIT_STALL = 0, 2, 3

COLUMNS = ("algorithm", "m", "n", "s", "trial", "seed", "re_er", "psnr", "f_final",
           "iterations", "newton_steps", "time_s", "success", "termination")


class UsageError(Exception):
    pass


def parse_range(text: str, cast=int) -> list:
    """``lo:hi:step`` (inclusive), a comma list, or a single value."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = cast(parts[0]), cast(parts[1])
            step = cast(parts[2]) if len(parts) == 3 else cast(1)
            if step <= 0:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [cast(lo + i * step) if cast is int else round(lo + i * step, 12)
                    for i in range(max(count, 0))]
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad range {text!r}; use lo:hi:step or a comma list") from None


def parse_algs(text: Optional[str]) -> list:
    if not text:
        return list(ALGORITHMS)
    names = [a.strip().lower() for a in text.split(",") if a.strip()]
    bad = [a for a in names if a not in ALGORITHMS]
    if bad:
        raise UsageError(f"unknown algorithm(s): {', '.join(bad)}; "
                         f"valid names: {', '.join(ALGORITHMS)}")
    return names


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def format_rows(rows: Sequence[TrialResult], timings: bool = False) -> str:
    """CSV data section: column header plus one line per trial."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        d = asdict(r)
        if not timings:
            d["time_s"] = ""
        w.writerow([_fmt(d[c]) for c in COLUMNS])
    return buf.getvalue()


def manifest_lines(command: str, params: dict, base_seed) -> list:
    started = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"# command: {command}", f"# tool_version: sparsco {__version__}",
             f"# base_seed: {base_seed}", f"# started: {started}",
             f"# rng: {bench.RNG_NAME}"]
    lines += [f"# param.{k}: {v}" for k, v in sorted(params.items())]
    return lines


def write_csv(path: str, command: str, params: dict, base_seed, rows, timings: bool) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(manifest_lines(command, params, base_seed)) + "\n")
        fh.write(format_rows(rows, timings))


def _check_dims(m, n, s):
    if s is not None and s < 1:
        raise UsageError("s must be >= 1")
    if m is not None and m < 1:
        raise UsageError("m must be >= 1")
    if n is not None and n < 1:
        raise UsageError("n must be >= 1")
    if s is not None and n is not None and s > n:
        raise UsageError("s must be <= n")


def _generate(args):
    if None in (args.m, args.n, args.s):
        raise UsageError("give --instance, or all of --m, --n and --s")
    _check_dims(args.m, args.n, args.s)
    gen = bench.gen_qcs_instance if args.kind == "qcs" else bench.gen_gaussian_instance
    return gen(args.m, args.n, args.s, args.seed)


def cmd_solve(args) -> int:
    if args.instance:
        inst = read_instance(args.instance)
        if args.s is not None:
            _check_dims(None, None, args.s)
    else:
        inst = _generate(args)
    alg = parse_algs(args.alg)[0]
    if inst.kind is ProblemKind.QCS and alg != GPNP_NAME:
        raise UsageError(f"algorithm {alg} only supports cs instances")
    row = bench.evaluate(alg, inst, 0)
    sys.stdout.write(format_rows([row], timings=True))
    return EXIT_STALL if row.termination == "line_search_stalled" else EXIT_OK


def cmd_gen(args) -> int:
    inst = _generate(args)
    write_instance(inst, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    algs = parse_algs(args.algs)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    if args.suite == "success-rate":
        s_values = parse_range(args.s)
        for s in s_values:
            _check_dims(args.m, args.n, s)
        rows = bench.run_success_rate(algs, args.m, args.n, s_values, args.trials,
                                      args.seed, workers=args.workers)
    elif args.suite == "sample-sweep":
        fracs = parse_range(args.m_frac, float)
        _check_dims(None, args.n, args.s)
        rows = bench.run_sample_sweep(algs, args.n, args.s, fracs, args.trials,
                                      args.seed, workers=args.workers)
    elif args.suite == "scaling":
        sizes = []
        for spec in args.size or ["500x2000x100"]:
            try:
                m, n, s = (int(v) for v in spec.lower().split("x"))
            except ValueError:
                raise UsageError(f"bad --size {spec!r}; use MxNxS") from None
            _check_dims(m, n, s)
            sizes.append((m, n, s))
        rows = bench.run_scaling(algs, sizes, args.trials, args.seed, workers=args.workers)
    else:
        if algs != [GPNP_NAME]:
            raise UsageError("the qcs suite only runs gpnp")
        s_values = parse_range(args.s)
        n_values = parse_range(args.n_values) if args.n_values else []
        rows = bench.run_qcs(n_values, args.trials, args.seed, s_values=s_values,
                             recovery_dims=(args.m, args.n), workers=args.workers)
    write_csv(args.out, f"bench {args.suite}", params, args.seed, rows, args.timings)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsco", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sparsco {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def gen_args(p):
        p.add_argument("--kind", choices=("cs", "qcs"), default="cs")
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--s", type=int)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("solve", help="solve one instance and print a result row")
    gen_args(p)
    p.add_argument("--instance", help="instance file to solve instead of generating one")
    p.add_argument("--alg", default=GPNP_NAME, help=f"one of {', '.join(ALGORITHMS)}")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate an instance file")
    gen_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    suites = p.add_subparsers(dest="suite", required=True)

    def common(q):
        q.add_argument("--trials", type=int, default=100)
        q.add_argument("--seed", type=int, default=1)
        q.add_argument("--algs", default="", help="comma list; empty means all")
        q.add_argument("--out", required=True)
        q.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: $GPNP_THREADS or CPU count)")
        q.add_argument("--timings", action="store_true",
                       help="fill the time_s column (makes output run-dependent)")
        q.set_defaults(func=cmd_bench)

    q = suites.add_parser("success-rate")
    q.add_argument("--n", type=int, default=256)
    q.add_argument("--m", type=int, default=64)
    q.add_argument("--s", default="5:35:1")
    common(q)

    q = suites.add_parser("sample-sweep")
    q.add_argument("--n", type=int, default=256)
    q.add_argument("--s", type=int, default=13)
    q.add_argument("--m-frac", default="0.08:0.34:0.02")
    common(q)

    q = suites.add_parser("scaling")
    q.add_argument("--size", action="append", help="MxNxS, repeatable (default 500x2000x100)")
    common(q)
    q.set_defaults(trials=20)

    q = suites.add_parser("qcs")
    q.add_argument("--m", type=int, default=80)
    q.add_argument("--n", type=int, default=120)
    q.add_argument("--s", default="3:15:1")
    q.add_argument("--n-values", default="500", help="scaling grid sizes; m=0.8n, s=0.01n")
    common(q)
    q.set_defaults(trials=20, algs=GPNP_NAME)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, InstanceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
