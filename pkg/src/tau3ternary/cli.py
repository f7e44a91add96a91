"""Command-line interface.

Every subcommand writes a machine-readable report (JSON or CSV) to stdout
or ``--output`` and a short human summary to stderr.  Exit status is 0 when
all in-command checks pass, 1 when a check fails, 2 on usage errors, 3 on
io failures, and 10-19 for the computation error classes in ``errors``.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numba

from . import __version__
from .errors import EXIT_CODES, Tau3Error
from .report import serialize_report

CHECK_FAILED = 1
USAGE_ERROR = 2
IO_FAILURE = 3


class Outcome:
    """A report plus the pass/fail state of the command's own checks."""

    def __init__(self, report, passed: bool = True, summary: str = ""):
        self.report = report
        self.passed = passed
        self.summary = summary


def _tables(args, limit: int):
    from .arith import cached_tables

    return cached_tables(limit, args.cache_dir)


def cmd_sieve(args) -> Outcome:
    from .arith import save_tables

    t = _tables(args, args.limit)
    if args.save:
        save_tables(t, args.save)
    shown = range(1, min(t.limit, 12) + 1)
    report = {
        "command": "sieve",
        "limit": t.limit,
        "sum_tau": int(t.tau.sum()),
        "sum_tau3": int(t.tau3.sum()),
        "head": [{"n": n, "tau": int(t.tau[n]), "tau3": int(t.tau3[n])} for n in shown],
        "saved_to": args.save,
    }
    return Outcome(report, True, f"tables to {t.limit}: sum tau3 = {report['sum_tau3']}")


def cmd_lhs(args) -> Outcome:
    from .theorem import brute_lhs, required_limit

    t = _tables(args, required_limit(args.variant, args.x))
    value = brute_lhs(args.variant, args.x, t)
    report = {"command": "lhs", "variant": args.variant, "x": args.x, "lhs": value}
    return Outcome(report, True, f"{args.variant} at x={args.x}: {value}")


def cmd_constants(args) -> Outcome:
    from .special import fundamental_constants, singular_series_partial

    c = fundamental_constants()
    series = []
    for ell in range(3):
        s = singular_series_partial(ell, args.Q)
        series.append({
            "ell": ell, "Q": s.Q, "value": s.value, "imag": s.imag,
            "block_ranges": s.block_ranges, "block_magnitudes": s.block_magnitudes,
            "fitted_tail_exponent": s.fitted_tail_exponent, "fit_residual": s.fit_residual,
        })
    report = {
        "command": "constants",
        "gamma": c.gamma, "gamma1": c.gamma1, "zeta3": c.zeta3, "zeta5": c.zeta5,
        "tau_variant_leading": c.tau_variant_leading,
        "singular_series": series,
    }
    summ = ", ".join(f"C{s['ell']}={s['value']:.10f}" for s in series)
    return Outcome(report, True, f"Q={args.Q}: {summ}")


ORACLE_TOL = 1e-5


def cmd_integrals(args) -> Outcome:
    from .oscint import geometric_oracle, singular_integral

    ells = [args.ell] if args.ell is not None else [0, 1, 2]
    rows, ok = [], True
    for ell in ells:
        r = singular_integral(args.kind, ell, args.x, args.X)
        o = geometric_oracle(args.kind, ell, args.x, args.X)
        delta = abs(r.value - o)
        ok &= delta <= ORACLE_TOL
        rows.append({"kind": args.kind, "ell": ell, "value": r.value, "err_estimate": r.err_estimate,
                     "beta_cutoff": r.beta_cutoff, "node_count": r.node_count,
                     "oracle": o, "oracle_delta": delta, "tolerance": ORACLE_TOL})
    report = {"command": "integrals", "x": args.x, "X": args.X, "rows": rows}
    summ = "; ".join(f"{args.kind}{r['ell']}={r['value']:.8f} (oracle delta {r['oracle_delta']:.1e})"
                     for r in rows)
    return Outcome(report, bool(ok), summ)


def _quad_cfg(args) -> dict:
    return {"integrals": args.integrals, "normalization": args.normalization}


def cmd_predict(args) -> Outcome:
    from .theorem import main_coefficients, predict_main_terms

    rows = []
    for x in args.x:
        t1, t2, t3 = predict_main_terms(args.variant, x, args.Q, _quad_cfg(args))
        rows.append({"x": x, "t1": t1, "t2": t2, "t3": t3, "predicted": t1 + t2 + t3})
    A, B, C = main_coefficients(args.variant, args.Q, args.integrals, args.normalization)
    report = {"command": "predict", "variant": args.variant, "Q": args.Q, "config": _quad_cfg(args),
              "coefficients": [A, B, C], "rows": rows}
    return Outcome(report, True, f"coefficients {A:.10f}, {B:.10f}, {C:.10f}")


def cmd_compare(args) -> Outcome:
    from .theorem import compare, compare_sweep, required_limit

    xs = sorted(args.x)
    t = _tables(args, max(required_limit(args.variant, x) for x in xs))
    if len(xs) == 1:
        r = compare(args.variant, xs[0], t, args.Q, _quad_cfg(args))
        return Outcome(r, True, f"x={r.x:g}: lhs={r.lhs}, predicted={r.predicted:.6e}, ratio={r.ratio:.6f}")
    sweep = compare_sweep(args.variant, xs, t, args.Q, _quad_cfg(args))
    ratios = ", ".join(f"{r.ratio:.6f}" for r in sweep["reports"])
    return Outcome(sweep, True, f"ratios {ratios}; fitted exponent {sweep['fitted_exponent']:.3f}")


def cmd_charsum(args) -> Outcome:
    from .expsum import bound_survey

    s = bound_survey(args.prime_max, args.samples, seed=args.seed, weil_c_max=args.weil_c_max)
    ok = (s["max_T_ratio"] <= 3 and s["closed_form_max_error"] <= 1e-6
          and s["weil"]["max_weil_ratio"] <= 1 + 1e-9)
    s = {"command": "charsum", **s}
    summ = (f"max |T|/p^2.5 = {s['max_T_ratio']:.4f}, closed-form error {s['closed_form_max_error']:.1e}, "
            f"Weil ratio {s['weil']['max_weil_ratio']:.6f}")
    return Outcome(s, bool(ok), summ)


VORONOI_TOL = 1e-2


def cmd_voronoi(args) -> Outcome:
    from .voronoi import make_bump, voronoi_check

    w = make_bump(args.X, args.M)
    t = _tables(args, int(math.floor(args.X)))
    r = voronoi_check(args.q, args.a, w, args.dual_cutoff, t, normalization=args.normalization)
    r = {"command": "voronoi", **r, "tolerance": VORONOI_TOL}
    ok = r["residual"] <= VORONOI_TOL
    summ = (f"q={args.q} a={args.a}: residual {r['residual']:.3e} "
            f"(residue {r['residual_residue']:.3e}, halved {r['residual_halved']:.3e})")
    return Outcome(r, bool(ok), summ)


def cmd_verify_all(args) -> Outcome:
    from .acceptance import Context, run_all, suite_report

    ctx = Context(args.seed, args.cache_dir)
    only = [int(s) for s in args.only.split(",")] if args.only else None
    results = run_all(ctx, only, progress=lambda r: print(r.line(), file=sys.stderr, flush=True))
    report = suite_report(results, args.seed)
    n_ok = sum(r.passed for r in results)
    return Outcome(report, report["all_passed"], f"{n_ok}/{len(results)} criteria passed")


VARIANT_CHOICES = ("tau3-box", "tau3-ball", "tau-box", "identity-1.5-left", "identity-1.5-right")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all sampled sweeps (default 0)")
    common.add_argument("--threads", type=_positive_int, default=None, help="cap on worker threads")
    common.add_argument("--output", default=None, help="report path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    common.add_argument("--cache-dir", default=None, help="directory for sieved table files")

    p = argparse.ArgumentParser(prog="tau3ternary", description=__doc__.splitlines()[0],
                                epilog="exit codes: " + "; ".join(f"{k} {v}" for k, v in sorted(EXIT_CODES.items())))
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sieve", parents=[common], help="build or inspect divisor tables")
    s.add_argument("--limit", type=_positive_int, required=True)
    s.add_argument("--save", default=None, help="write the tables to this file")
    s.set_defaults(func=cmd_sieve)

    s = sub.add_parser("lhs", parents=[common], help="brute-force left-hand side")
    s.add_argument("--variant", choices=VARIANT_CHOICES, required=True)
    s.add_argument("--x", type=_positive_float, required=True)
    s.set_defaults(func=cmd_lhs)

    s = sub.add_parser("constants", parents=[common], help="fundamental constants and singular series")
    s.add_argument("--Q", type=_positive_int, default=256)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("integrals", parents=[common], help="singular integrals with oracle deltas")
    s.add_argument("--kind", choices=("J", "K", "I"), required=True)
    s.add_argument("--ell", type=int, choices=(0, 1, 2), default=None)
    s.add_argument("--x", type=_positive_float, default=None, help="x for kind I")
    s.add_argument("--X", type=_positive_float, default=None, help="X for kind I")
    s.set_defaults(func=cmd_integrals)

    for name, func, hlp in (("predict", cmd_predict, "main-term prediction"),
                            ("compare", cmd_compare, "brute force vs prediction")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--variant", choices=("tau3-box", "tau3-ball"), default="tau3-box")
        s.add_argument("--x", type=_positive_float, nargs="+", required=True)
        s.add_argument("--Q", type=_positive_int, default=256)
        s.add_argument("--integrals", choices=("quadrature", "oracle"), default="quadrature")
        s.add_argument("--normalization", choices=("residue", "halved"), default="residue")
        s.set_defaults(func=func)

    s = sub.add_parser("charsum", parents=[common], help="character-sum bound survey")
    s.add_argument("--prime-max", type=_positive_int, default=97)
    s.add_argument("--samples", type=_positive_int, default=500)
    s.add_argument("--weil-c-max", type=_positive_int, default=60)
    s.set_defaults(func=cmd_charsum)

    s = sub.add_parser("voronoi", parents=[common], help="summation-formula residual")
    s.add_argument("--q", type=_positive_int, required=True)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--X", type=_positive_float, default=2000.0)
    s.add_argument("--M", type=_positive_float, default=8.0)
    s.add_argument("--dual-cutoff", type=_positive_int, default=None)
    s.add_argument("--normalization", choices=("residue", "halved"), default="residue")
    s.set_defaults(func=cmd_voronoi)

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", default=None, help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.threads:
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        out = args.func(args)
    except Tau3Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return IO_FAILURE
    try:
        text = serialize_report(out.report, args.fmt)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return IO_FAILURE
    status = "ok" if out.passed else "CHECK FAILED"
    print(f"{args.command}: {status}: {out.summary}", file=sys.stderr)
    return 0 if out.passed else CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
