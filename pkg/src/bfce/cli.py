"""Command-line front end.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import sizing
from .estimator import estimate_papapetrou, estimate_swamidass
from .exceptions import BfceError
from .filter import BloomFilter
from .fpp import APPROXIMATE, EXACT, FILL_RATIO, FppModel, approx_fpp
from .hashing import MASK64
from .simulation import (UniverseSpec, default_checkpoints, overload_sweep,
                         run_batch_experiment, run_experiment)

DEFAULT_M = 162945
DEFAULT_K = 6


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _table(columns, rows, fmt):
    if fmt == "json-lines":
        return "".join(json.dumps(dict(zip(columns, r))) + "\n" for r in rows)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return out.getvalue()


def _positive(kind=int):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return parse


def _non_negative_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return v


def _seed(text):
    v = _non_negative_int(text)
    if v > MASK64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _probability(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text!r}")
    return v


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("checkpoints must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=_seed, default=0, help="64-bit base seed")
    shared.add_argument("--out", default="-", help="output path, '-' for stdout")
    shared.add_argument("--format", choices=("csv", "json-lines"), default="csv")

    p = argparse.ArgumentParser(prog="bfce", description="Bloom filter cardinality estimation")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("size", parents=[shared], help="choose m and k")
    sp.add_argument("--smax", type=_positive(), required=True)
    sp.add_argument("--fpp", type=_probability, help="target FPP at smax (classical sizing)")
    sp.add_argument("--error-budget", type=_positive(float),
                    help="target expected number of missed elements at smax")
    sp.add_argument("--m", type=_positive(), help="fixed m; k from the cumulative-error criterion")

    sp = sub.add_parser("fpp", parents=[shared], help="false-positive probability")
    sp.add_argument("--m", type=_positive(), required=True)
    sp.add_argument("--k", type=_positive(), required=True)
    sp.add_argument("--n", type=_non_negative_int, nargs="+", default=None,
                    help="number(s) of inserted elements")
    sp.add_argument("--ones", type=_non_negative_int, nargs="+", default=None,
                    help="number(s) of set bits (fill-ratio model)")
    sp.add_argument("--model", choices=(APPROXIMATE, EXACT, FILL_RATIO), default=APPROXIMATE)

    sp = sub.add_parser("estimate", parents=[shared],
                        help="count distinct newline-delimited tokens")
    sp.add_argument("--m", type=_positive(), default=DEFAULT_M)
    sp.add_argument("--k", type=_positive(), default=DEFAULT_K)
    sp.add_argument("--batch-first", type=_non_negative_int, default=0, metavar="N",
                    help="insert the first N distinct tokens at once")
    sp.add_argument("--in", dest="input", default="-", help="input path, '-' for stdin")

    sp = sub.add_parser("simulate", parents=[shared], help="Monte-Carlo accuracy table")
    _filter_args(sp)
    sp.add_argument("--trials", type=_positive(), default=1000)
    sp.add_argument("--p-smax", type=float, default=1.0)
    sp.add_argument("--stop-s", type=_positive(), default=17000)
    sp.add_argument("--smax", type=_positive(), default=None,
                    help="capacity used to size the universe (default: --stop-s)")
    sp.add_argument("--checkpoints", type=_int_list, default=None,
                    help="comma-separated s values (default: every 500 plus stop-s)")

    sp = sub.add_parser("batch-sim", parents=[shared], help="batch-start vs one-by-one filling")
    _filter_args(sp)
    sp.add_argument("--b", type=_non_negative_int, default=50)
    sp.add_argument("--trials", type=_positive(), default=100)
    sp.add_argument("--stop-s", type=_positive(), default=16970)

    sp = sub.add_parser("overload", parents=[shared], help="fill past capacity")
    _filter_args(sp)
    sp.add_argument("--trials", type=_positive(), default=1000)
    sp.add_argument("--max-s", type=_positive(), default=30000)
    sp.add_argument("--step", type=_positive(), default=500)
    return p


def _filter_args(sp):
    sp.add_argument("--m", type=_positive(), default=DEFAULT_M)
    sp.add_argument("--k", type=_positive(), default=DEFAULT_K)


def cmd_size(a):
    given = [x is not None for x in (a.fpp, a.error_budget, a.m)]
    if sum(given) != 1:
        raise UsageError("size needs exactly one of --fpp, --error-budget, --m")
    if a.fpp is not None:
        m, k = sizing.classical_size(a.smax, a.fpp)
    elif a.error_budget is not None:
        m, k = sizing.size_for_error_budget(a.smax, a.error_budget)
    else:
        m, k = a.m, sizing.k_opt_cumulative(a.m, a.smax)
    t = approx_fpp(m, k, a.smax)
    expected = sizing.cumulative_error(m, k, a.smax)
    try:
        bound = sizing.mean_error_upper_bound(m, k, a.smax)
    except ArithmeticError:
        bound = math.inf
    return _table(("m", "k", "fpp_at_smax", "expected_error", "error_upper_bound"),
                  [(m, k, t, expected, bound)], a.format)


def cmd_fpp(a):
    if a.k > a.m:
        raise UsageError("--k must not exceed --m")
    if a.model == FILL_RATIO:
        if a.ones is None or a.n is not None:
            raise UsageError("fill-ratio model takes --ones (and not --n)")
        if any(b > a.m for b in a.ones):
            raise UsageError("--ones must not exceed --m")
        model = FppModel(FILL_RATIO, a.m, a.k)
        rows = [(a.m, a.k, b, a.model, model(0, b)) for b in a.ones]
        return _table(("m", "k", "ones", "model", "fpp"), rows, a.format)
    if a.n is None or a.ones is not None:
        raise UsageError(f"{a.model} model takes --n (and not --ones)")
    model = FppModel(a.model, a.m, a.k)
    rows = [(a.m, a.k, n, a.model, model(n)) for n in a.n]
    return _table(("m", "k", "n", "model", "fpp"), rows, a.format)


def _tokens(stream):
    for line in stream:
        token = line[:-1] if line.endswith(b"\n") else line
        if token:
            yield token


def _baseline(fn, filt):
    if filt.ones >= filt.m:
        return math.inf
    return fn(filt.m, filt.k, filt.ones)


def estimate_stream(stream, m: int, k: int, seed: int = 0, batch_first: int = 0) -> BloomFilter:
    """Feed newline-delimited tokens from a binary stream into a fresh filter."""
    filt = BloomFilter(m, k, seed)
    tokens = _tokens(stream)
    if batch_first:
        batch = {}
        for tok in tokens:
            batch[tok] = None
            if len(batch) == batch_first:
                break
        filt.insert_batch_initial(batch)
    for tok in tokens:
        filt.insert_counting(tok)
    return filt


def cmd_estimate(a):
    if a.k > a.m:
        raise UsageError("--k must not exceed --m")
    if a.input == "-":
        filt = estimate_stream(sys.stdin.buffer, a.m, a.k, a.seed, a.batch_first)
    else:
        with open(a.input, "rb") as fh:
            filt = estimate_stream(fh, a.m, a.k, a.seed, a.batch_first)
    acc = filt.correction
    row = (filt.s, filt.ones, filt.s + acc.sum_mean, math.sqrt(acc.sum_var),
           _baseline(estimate_swamidass, filt), _baseline(estimate_papapetrou, filt))
    return _table(("s", "ones", "corrected_mean", "corrected_std", "swamidass", "papapetrou"),
                  [row], a.format)


def _metrics_out(metrics, fmt):
    return metrics.to_json_lines() if fmt == "json-lines" else metrics.to_csv()


def cmd_simulate(a):
    if not 0.0 < a.p_smax <= 1.0:
        raise UsageError("--p-smax must lie in (0, 1]")
    if a.trials < 2:
        raise UsageError("--trials must be >= 2")
    if a.k > a.m:
        raise UsageError("--k must not exceed --m")
    spec = UniverseSpec(a.smax or a.stop_s, a.p_smax)
    if spec.replacement and a.stop_s >= spec.universe_size:
        raise UsageError(f"--stop-s {a.stop_s} unreachable from a universe of {spec.universe_size}")
    cps = default_checkpoints(a.stop_s) if a.checkpoints is None else a.checkpoints
    if max(cps) > a.stop_s:
        raise UsageError("checkpoints must not exceed --stop-s")
    metrics = run_experiment(a.m, a.k, spec, a.trials, cps, a.stop_s, base_seed=a.seed)
    return _metrics_out(metrics, a.format)


def cmd_batch_sim(a):
    if a.b >= a.stop_s:
        raise UsageError("--b must be below --stop-s")
    if a.k > a.m:
        raise UsageError("--k must not exceed --m")
    res = run_batch_experiment(a.m, a.k, a.b, a.trials, a.stop_s, base_seed=a.seed)
    return _table(("b", "trials", "stop_s", "mean_error_batch", "mean_error_one_by_one"),
                  [(a.b, a.trials, a.stop_s, res.mean_error_batch, res.mean_error_one_by_one)],
                  a.format)


def cmd_overload(a):
    if a.trials < 2:
        raise UsageError("--trials must be >= 2")
    if a.k > a.m:
        raise UsageError("--k must not exceed --m")
    if approx_fpp(a.m, a.k, a.max_s) >= 0.5:
        raise UsageError("--max-s drives the FPP to 0.5 or more")
    s_values = default_checkpoints(a.max_s, a.step)
    return _metrics_out(overload_sweep(a.m, a.k, a.trials, s_values, base_seed=a.seed), a.format)


COMMANDS = {
    "size": cmd_size, "fpp": cmd_fpp, "estimate": cmd_estimate, "simulate": cmd_simulate,
    "batch-sim": cmd_batch_sim, "overload": cmd_overload,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bfce {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (BfceError, OSError, ArithmeticError, ValueError) as exc:
        print(f"bfce {args.command}: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
