"""Command-line interface: ``permmoments <command> [options]``.

Complex numbers are written ``re,im`` (``0.3,0.4``), ``polar:r,phi`` or as a
bare real.  Exponents are integers, reals or ``re,im`` pairs.  Points on the
unit circle should be given in polar form.

Exit status: 0 on success, 2 on invalid input, 1 when the computation fails.
JSON documents carry ``"schema": 1``; CSV column sets are fixed per command.
"""
from __future__ import annotations

import argparse
import cmath
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from numbers import Integral

from . import __version__
from .asymptotics import (
    prediction_table,
    write_prediction_csv,
)
from .errors import QueryError, RootOfUnityError, TruncationError
from .feller import DEFAULT_SEED, make_rng, mc_moment, mc_Z_infty, simulate_coupling_batch, write_coupling_csv
from .moments import gf_moment, gf_moment_complex, gf_moment_integer, limit_complex, limit_integer
from .partitions import (
    BRUTE_FORCE_MAX_N,
    MomentQuery,
    brute_force_moment,
    exact_moment_partition_sum,
)

SCHEMA = 1
WORKERS_ENV = "PERMMOMENTS_WORKERS"
SWEEP_COLUMNS = ["n", "value_re", "value_im"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    t = text.strip()
    try:
        if t.startswith("polar:"):
            r, phi = (float(v) for v in t[6:].split(","))
            z = cmath.rect(r, phi)
        elif "," in t:
            re_, im_ = (float(v) for v in t.split(","))
            z = complex(re_, im_)
        else:
            z = complex(float(t), 0.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return z


def parse_exponent(text: str):
    t = text.strip()
    try:
        return int(t)
    except ValueError:
        pass
    z = parse_complex(t)
    return z.real if z.imag == 0 else z


def _num(v):
    """JSON form of a number: ints and reals stay scalars, complex becomes ``{"re", "im"}``."""
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, float):
        return v
    z = complex(v)
    return {"re": z.real, "im": z.imag}


def _query(args, n=None) -> MomentQuery:
    xs, ss = args.x or [], args.s or []
    if len(xs) != len(ss):
        raise QueryError(f"--x given {len(xs)} times but --s {len(ss)} times")
    return MomentQuery(args.n if n is None else n, tuple(xs), tuple(ss))


def _inputs(args) -> dict:
    out = {}
    for key in ("n", "x", "s", "tol", "samples", "seed", "method", "representation"):
        v = getattr(args, key, None)
        if v is None:
            continue
        if isinstance(v, list):
            out[key] = [_num(e) for e in v]
        elif isinstance(v, str):
            out[key] = v
        else:
            out[key] = _num(v)
    return out


def _document(args, method: str, value: complex, **extra) -> dict:
    doc = {
        "schema": SCHEMA,
        "command": args.command,
        "inputs": _inputs(args),
        "method": method,
        "value": {"re": float(complex(value).real), "im": float(complex(value).imag)},
        "version": __version__,
    }
    doc.update(extra)
    return doc


def _emit(args, doc: dict | None = None, csv_text: str | None = None) -> None:
    if doc is not None and args.output == "json":
        text = json.dumps(doc, sort_keys=True, allow_nan=False) + "\n"
    elif doc is not None:
        v = doc["value"]
        text = ",".join(SWEEP_COLUMNS) + "\n" + f"{args.n},{v['re']!r},{v['im']!r}\n"
    else:
        text = csv_text
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_exact(args) -> None:
    q = _query(args)
    t0 = time.perf_counter()
    if args.method == "brute":
        value = brute_force_moment(q)
    else:
        value = exact_moment_partition_sum(q)
    _emit(args, _document(args, args.method, value, elapsed_s=time.perf_counter() - t0))


def cmd_gf(args) -> None:
    q = _query(args)
    t0 = time.perf_counter()
    if q.integer_exponents:
        value = gf_moment_integer(q, args.representation)
        method = args.representation or "auto"
    else:
        value = gf_moment_complex(q)
        method = "exp-log"
    _emit(args, _document(args, f"gf:{method}", value, elapsed_s=time.perf_counter() - t0))


def cmd_limit(args) -> None:
    xs, ss = args.x or [], args.s or []
    if len(xs) != len(ss) or not xs:
        raise QueryError("need matching, nonempty --x and --s lists")
    t0 = time.perf_counter()
    if all(isinstance(s, int) and s >= 0 for s in ss):
        value, method, bound = limit_integer(xs, ss), "closed-product", 0.0
    else:
        value, method = limit_complex(xs, ss, args.tol), "lattice-product"
        bound = args.tol * abs(value)
    _emit(args, _document(args, method, value, error_bound=bound, elapsed_s=time.perf_counter() - t0))


def cmd_simulate(args) -> None:
    t0 = time.perf_counter()
    if args.mode == "coupling":
        M = args.m if args.m is not None else min(args.n, 10)
        batch = simulate_coupling_batch(args.n, M, args.horizon, args.samples, make_rng(args.seed))
        buf = io.StringIO()
        write_coupling_csv(batch, buf)
        _emit(args, csv_text=buf.getvalue())
        return
    q = _query(args)
    est = mc_moment(q, args.samples, args.seed)
    _emit(args, _document(args, "monte-carlo", est.mean, stderr=est.stderr, elapsed_s=time.perf_counter() - t0))


def cmd_zinfty(args) -> None:
    if not args.x or not args.s or len(args.x) != 1 or len(args.s) != 1:
        raise QueryError("zinfty takes exactly one --x and one --s")
    t0 = time.perf_counter()
    est = mc_Z_infty(args.x[0], args.s[0], args.samples, args.seed, args.tol)
    _emit(args, _document(args, "monte-carlo", est.mean, stderr=est.stderr, elapsed_s=time.perf_counter() - t0))


def cmd_asymptotic(args) -> None:
    if args.x is None or len(args.x) != 1:
        raise QueryError("asymptotic takes exactly one --x")
    ns = args.n_list or [args.n]
    t0 = time.perf_counter()
    rows = prediction_table(args.s1, args.s2, args.x[0], ns)
    if args.output == "csv":
        buf = io.StringIO()
        write_prediction_csv(rows, buf)
        _emit(args, csv_text=buf.getvalue())
        return
    doc = {
        "schema": SCHEMA,
        "command": args.command,
        "inputs": {"s1": args.s1, "s2": args.s2, "x": _num(complex(args.x[0])), "n": ns},
        "method": "leading-term",
        "rows": [
            {"n": r.n, "exact": _num(complex(r.exact)), "predicted": _num(complex(r.predicted)),
             "ratio_abs": None if r.flagged else r.ratio_abs, "flagged": r.flagged}
            for r in rows
        ],
        "elapsed_s": time.perf_counter() - t0,
        "version": __version__,
    }
    _emit(args, doc)


def _sweep_value(task) -> complex:
    method, n, xs, ss, seed, samples = task
    q = MomentQuery(n, xs, ss)
    if method == "exact":
        return exact_moment_partition_sum(q)
    if method == "mc":
        return mc_moment(q, samples, seed).mean
    return gf_moment(q)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        w = int(raw)
    except ValueError:
        raise QueryError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if w < 1:
        raise QueryError(f"{WORKERS_ENV} must be >= 1")
    return w


def cmd_sweep(args) -> None:
    if args.n_start < 0 or args.n_step < 1 or args.n_stop < args.n_start:
        raise QueryError("need 0 <= n-start <= n-stop and n-step >= 1")
    ns = list(range(args.n_start, args.n_stop + 1, args.n_step))
    # validate once before fanning out
    _query(args, ns[0])
    tasks = [(args.method, n, tuple(args.x), tuple(args.s), args.seed, args.samples) for n in ns]
    workers = _workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_sweep_value, tasks))
    else:
        values = [_sweep_value(t) for t in tasks]
    lines = [",".join(SWEEP_COLUMNS)]
    for n, v in zip(ns, values):
        v = complex(v)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ArithmeticError(f"non-finite value at n={n}")
        lines.append(f"{n},{v.real!r},{v.imag!r}")
    _emit(args, csv_text="\n".join(lines) + "\n")


def selftest_grid() -> list[tuple[str, bool, float]]:
    """Small oracle-equivalence grid: ``(label, ok, max relative error)``."""
    rng = make_rng(DEFAULT_SEED)
    results = []
    worst = 0.0
    for n in range(0, 7):
        for _ in range(3):
            x = complex(*(rng.uniform(-0.6, 0.6, 2)))
            y = complex(*(rng.uniform(-0.6, 0.6, 2)))
            q = MomentQuery(n, (x, y), (int(rng.integers(0, 4)), int(rng.integers(0, 4))))
            vals = [brute_force_moment(q), exact_moment_partition_sum(q),
                    gf_moment_integer(q, "integer-product"), gf_moment_integer(q, "exp-log")]
            scale = abs(vals[0]) + 1e-12
            worst = max(worst, max(abs(v - vals[0]) for v in vals) / scale)
    results.append(("oracle triangle n<=6", worst < 1e-9, worst))
    worst = 0.0
    for n in (1, 10, 40):
        x = complex(0.5, -0.3)
        q = MomentQuery.single(n, x, 1)
        for v in (exact_moment_partition_sum(q), gf_moment(q)):
            worst = max(worst, abs(v - (1 - x)))
    results.append(("first moment 1-x", worst < 1e-12, worst))
    q = MomentQuery.single(25, 0.4, 1 + 1j)
    a, b = gf_moment_complex(q), exact_moment_partition_sum(q)
    err = abs(a - b) / abs(b)
    results.append(("complex exponent", err < 1e-9, err))
    return results


def cmd_selftest(args) -> int:
    t0 = time.perf_counter()
    results = selftest_grid()
    ok = all(r[1] for r in results)
    doc = {
        "schema": SCHEMA,
        "command": "selftest",
        "checks": [{"name": name, "passed": passed, "max_error": err} for name, passed, err in results],
        "passed": ok,
        "elapsed_s": time.perf_counter() - t0,
        "version": __version__,
    }
    if args.output == "json":
        _emit(args, doc)
    else:
        lines = [f"{'PASS' if p else 'FAIL'} {name} (max error {e:.3e})" for name, p, e in results]
        _emit(args, csv_text="\n".join(lines) + "\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permmoments", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, output="json", n_required=True):
        if n_required:
            p.add_argument("--n", type=int, required=True)
        p.add_argument("--x", type=parse_complex, action="append", help="evaluation point (repeatable)")
        p.add_argument("--s", type=parse_exponent, action="append", help="exponent (repeatable)")
        p.add_argument("--output", choices=["json", "csv"], default=output)
        p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("exact", help="partition sum or brute force over S_n")
    common(p)
    p.add_argument("--method", choices=["partition", "brute"], default="partition")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("gf", help="generating-function coefficient")
    common(p)
    p.add_argument("--representation", choices=["integer-product", "exp-log"], default=None)
    p.set_defaults(func=cmd_gf)

    p = sub.add_parser("limit", help="n -> infinity limit for max|x| < 1")
    common(p, n_required=False)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("simulate", help="Monte Carlo moment or coupled cycle counts")
    common(p)
    p.add_argument("--mode", choices=["moment", "coupling"], default="moment")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--m", type=int, default=None, help="largest cycle length tracked (coupling)")
    p.add_argument("--horizon", type=int, default=None, help="length of the xi sequence (coupling)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("zinfty", help="Monte Carlo mean of Z_infinity(x)**s")
    common(p, n_required=False)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_zinfty)

    p = sub.add_parser("asymptotic", help="exact vs leading-term prediction on |x| = 1")
    p.add_argument("--s1", type=int, required=True)
    p.add_argument("--s2", type=int, required=True)
    p.add_argument("--x", type=parse_complex, action="append")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--n-list", type=int, nargs="+", default=None)
    p.add_argument("--output", choices=["json", "csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("sweep", help="value over a range of n as CSV")
    p.add_argument("--n-start", type=int, required=True)
    p.add_argument("--n-stop", type=int, required=True)
    p.add_argument("--n-step", type=int, default=1)
    p.add_argument("--x", type=parse_complex, action="append", required=True)
    p.add_argument("--s", type=parse_exponent, action="append", required=True)
    p.add_argument("--method", choices=["gf", "exact", "mc"], default="gf")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", choices=["csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="oracle-equivalence grid; nonzero exit on failure")
    p.add_argument("--output", choices=["json", "text"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "samples", None) is not None and args.samples < 2:
            raise QueryError("--samples must be at least 2")
        if args.command == "exact" and args.method == "brute" and args.n > BRUTE_FORCE_MAX_N:
            raise QueryError(f"brute force is capped at n <= {BRUTE_FORCE_MAX_N}")
        status = args.func(args)
    except (UsageError, QueryError) as exc:
        print(f"permmoments: error: {exc}", file=sys.stderr)
        return 2
    except (RootOfUnityError, TruncationError, ArithmeticError, OverflowError, ValueError) as exc:
        print(f"permmoments: computation failed: {exc}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
