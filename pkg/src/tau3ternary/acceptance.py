"""The acceptance suite: one function per criterion, shared by the test
suite and the ``verify-all`` command.

Each criterion returns a ``CriterionResult`` whose ``metrics`` hold only
deterministic quantities; wall-clock time is kept in a separate field so
serialized reports are byte-stable across runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .arith import DivisorTables, cached_tables
from .expsum import (
    _roots,
    bound_survey,
    charsum_C_direct,
    charsum_C_factored,
    gauss_sum_closed,
    sample_charsum_params,
    weil_survey,
)
from .oscint import singular_integral
from .special import tail_blocks, tail_decay_fit
from .theorem import brute_lhs, c5_stabilize, compare, required_limit
from .voronoi import (
    asymptotic_envelope,
    default_dual_cutoff,
    make_bump,
    phi_asymptotic,
    phi_contour,
    voronoi_terms,
)

TABLE_LIMIT = required_limit("tau3-box", 1e6)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict
    seconds: float = field(default=0.0, compare=False)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f} s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "metrics": self.metrics}


class Context:
    """Shared state: the seed and divisor tables built once."""

    def __init__(self, seed: int = 0, cache_dir=None, tables: DivisorTables | None = None):
        self.seed = int(seed)
        self.cache_dir = cache_dir
        self._tables = tables

    @property
    def tables(self) -> DivisorTables:
        if self._tables is None or self._tables.limit < TABLE_LIMIT:
            self._tables = cached_tables(TABLE_LIMIT, self.cache_dir)
        return self._tables


def criterion_1(ctx: Context) -> CriterionResult:
    rows = []
    for x in (100, 1000, 10000):
        left = brute_lhs("identity-1.5-left", x, ctx.tables)
        right = brute_lhs("identity-1.5-right", x, ctx.tables)
        rows.append({"x": x, "left": left, "right": right})
    ok = all(r["left"] == r["right"] for r in rows)
    return CriterionResult(1, "lattice sum of tau3(|n|^2) equals sum tau3(n) r3(n)", ok, {"rows": rows})


def criterion_2(ctx: Context) -> CriterionResult:
    J0 = singular_integral("J", 0)
    K0 = singular_integral("K", 0)
    dJ = abs(J0.value - 1.0)
    dK = abs(K0.value - math.pi / 6)
    metrics = {"J0": J0.value, "J0_delta": dJ, "K0": K0.value, "K0_delta": dK, "tolerance": 1e-5}
    return CriterionResult(2, "J0 = 1 and K0 = pi/6 by beta quadrature", dJ <= 1e-5 and dK <= 1e-5, metrics)


def criterion_3(ctx: Context) -> CriterionResult:
    worst, cases = 0.0, 0
    for q in range(1, 100, 2):
        d = np.arange(q, dtype=np.int64)
        a = np.array([x for x in range(q) if math.gcd(x, q) == 1] or [0], dtype=np.int64)
        quad = np.outer(a, d * d % q) % q
        roots = _roots(q)
        for b in range(-q, q + 1):
            direct = roots[(quad + (b % q) * d) % q].sum(axis=1)
            closed = np.array([gauss_sum_closed(int(x), b, q) for x in a])
            worst = max(worst, float(np.max(np.abs(direct.real - closed.real))),
                        float(np.max(np.abs(direct.imag - closed.imag))))
            cases += len(a)
    metrics = {"cases": cases, "max_componentwise_error": worst, "tolerance": 1e-9}
    return CriterionResult(3, "Gauss-sum closed forms, odd q <= 99", worst <= 1e-9, metrics)


def criterion_4(ctx: Context) -> CriterionResult:
    worst = 0.0
    params = sample_charsum_params(200, 60, ctx.seed)
    for p in params:
        err = abs(charsum_C_direct(p) - charsum_C_factored(p)) / p.q**3
        worst = max(worst, err)
    metrics = {"samples": len(params), "max_error_over_q3": worst, "tolerance": 1e-6}
    return CriterionResult(4, "direct vs factored character sum C", worst <= 1e-6, metrics)


def criterion_5(ctx: Context) -> CriterionResult:
    s = bound_survey(97, 500, seed=ctx.seed, weil_c_max=1)
    ok = s["max_T_ratio"] <= 3 and s["closed_form_max_error"] <= 1e-6
    metrics = {"max_T_ratio": s["max_T_ratio"], "closed_form_max_error": s["closed_form_max_error"],
               "closed_form_cases": s["closed_form_cases"],
               "per_prime_max": [[r["p"], r["mode"], r["max_ratio"]] for r in s["per_prime"]]}
    return CriterionResult(5, "|T| / p^(5/2) <= 3 and degenerate closed forms", ok, metrics)


def criterion_6(ctx: Context) -> CriterionResult:
    s = weil_survey(60)
    ok = s["max_weil_ratio"] <= 1 + 1e-9
    return CriterionResult(6, "Weil bound for Kloosterman sums, c <= 60", ok, s)


TAIL_QS = (64, 128, 256, 512)
TAIL_LIMITS = (-0.4, -0.3, -0.3)


def criterion_7(ctx: Context) -> CriterionResult:
    rows, ok = [], True
    for ell, lim in enumerate(TAIL_LIMITS):
        slope = tail_decay_fit(ell, TAIL_QS)
        rows.append({"ell": ell, "blocks": tail_blocks(ell, TAIL_QS), "exponent": slope, "limit": lim,
                     "passed": slope <= lim})
        ok &= slope <= lim
    return CriterionResult(7, "singular-series dyadic tail decay", bool(ok), {"Q": list(TAIL_QS), "rows": rows})


VORONOI_CASES = ((1, 1), (3, 1), (4, 3))


def criterion_8(ctx: Context) -> CriterionResult:
    w = make_bump(2000.0, 8.0)
    rows, ok = [], True
    for q, a in VORONOI_CASES:
        cut = default_dual_cutoff(q, w)
        t = voronoi_terms(q, a, w, 2 * cut, ctx.tables)
        lhs, main, dual = t["lhs"], t["main"], t["dual_cumulative"]
        r1 = abs(lhs - main - dual[cut - 1]) / abs(lhs)
        r2 = abs(lhs - main - dual[-1]) / abs(lhs)
        good = r1 <= 1e-2 and r2 < r1
        rows.append({"q": q, "a": a, "dual_cutoff": cut, "residual": r1, "residual_doubled": r2,
                     "passed": good})
        ok &= good
    return CriterionResult(8, "Voronoi identity residual and decrease under doubling", bool(ok),
                           {"X": w.X, "M": w.M, "rows": rows})


KERNEL_X = 2000.0
KERNEL_M = 256.0


def criterion_9(ctx: Context) -> CriterionResult:
    """Errors are measured against the leading-term scale, the L1 size of
    the first asymptotic term; the error relative to |Phi| itself is reported
    alongside."""
    w = make_bump(KERNEL_X, KERNEL_M)
    ys = np.logspace(4, 7, 10) / w.X
    rows, ok = [], True
    for k in (0, 1):
        pc = phi_contour(ys, k, w)
        pa = np.array([phi_asymptotic(y, k, w) for y in ys])
        env = np.array([asymptotic_envelope(y, k, w) for y in ys])
        scaled = np.abs(pc - pa) / env
        rel = np.abs(pc - pa) / np.abs(pc)
        rows.append({"k": k, "yX": (ys * w.X).tolist(), "scaled_error": scaled.tolist(),
                     "error_relative_to_phi": rel.tolist(), "max_scaled_error": float(scaled.max())})
        ok &= bool(scaled.max() <= 1e-3)
    return CriterionResult(9, "kernel contour vs first-order asymptotic", bool(ok),
                           {"X": w.X, "M": w.M, "tolerance": 1e-3, "rows": rows})


def criterion_10(ctx: Context) -> CriterionResult:
    reps = {x: compare("tau3-box", x, ctx.tables) for x in (1e4, 65536.0, 1e6)}
    r = {x: reps[x].ratio for x in reps}
    ok = 0.4 <= r[65536.0] <= 1.6 and abs(r[1e6] - 1) < abs(r[1e4] - 1)
    rows = [{"x": x, "lhs": rep.lhs, "predicted": rep.predicted, "ratio": rep.ratio} for x, rep in reps.items()]
    return CriterionResult(10, "tau3-box ratio trend", bool(ok), {"rows": rows})


def criterion_11(ctx: Context) -> CriterionResult:
    s = c5_stabilize([1e4, 1e5, 1e6], ctx.tables)
    return CriterionResult(11, "c5 stabilization with leading constant 4 zeta(3)/(5 zeta(5))",
                           bool(s["strictly_shrinking"]), s)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criterion(number: int, ctx: Context) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number](ctx)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(ctx: Context, only=None, progress=None) -> list[CriterionResult]:
    """Criteria 1-11 in order; criterion 12 compares two serialized runs."""
    out = []
    for n in sorted(only or CRITERIA):
        res = run_criterion(n, ctx)
        if progress:
            progress(res)
        out.append(res)
    return out


def suite_report(results: list[CriterionResult], seed: int) -> dict:
    return {
        "command": "verify-all",
        "seed": seed,
        "all_passed": all(r.passed for r in results),
        "criteria": [r.as_dict() for r in results],
    }


def criterion_12(first: bytes, second: bytes) -> CriterionResult:
    same = first == second
    return CriterionResult(12, "verify-all reports byte-identical across runs", same,
                           {"bytes_first": len(first), "bytes_second": len(second)})
