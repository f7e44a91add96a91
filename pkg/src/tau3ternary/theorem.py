"""Brute-force left-hand sides and main-term predictions for sums of tau3
and tau over three squares.

Two normalizations of the main terms are available.  "residue" uses the
Laurent coefficients of zeta(s)^3 at s = 1 in full (leading coefficient
C0 J0 / 2 for the box); "halved" is exactly half of it.  Brute force at
x >= 65536 sides with "residue" (ratio near 1 versus near 2), so that is the
default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba
import numpy as np

from .arith import DivisorTables, r3_table
from .errors import PreconditionError
from .oscint import geometric_oracle, singular_integral
from .special import DEFAULT_Q, fundamental_constants, singular_series_partial

# Prefer OpenMP: the bundled TBB is often too old and only emits a warning.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

VARIANTS = ("tau3-box", "tau3-ball", "tau-box", "identity-1.5-left", "identity-1.5-right")
NORMALIZATIONS = ("residue", "halved")


def _isqrt_floor(x: float) -> int:
    return math.isqrt(int(math.floor(x)))


@numba.njit(cache=True, parallel=True)
def _box_sum(table, B):
    # prange over n1 with an exact int64 reduction: order-independent.
    total = 0
    for a in numba.prange(1, B + 1):
        for b in range(1, B + 1):
            base = a * a + b * b
            for c in range(1, B + 1):
                total += table[base + c * c]
    return total


@numba.njit(cache=True)
def _ball_sum(table, N):
    """sum over n in Z^3 with 1 <= |n|^2 <= N of table[|n|^2]."""
    total = 0
    R = int(math.sqrt(N)) + 1
    for a in range(0, R + 1):
        wa = 1 if a == 0 else 2
        for b in range(0, R + 1):
            ab = a * a + b * b
            if ab > N:
                break
            wb = 1 if b == 0 else 2
            for c in range(0, R + 1):
                s = ab + c * c
                if s > N:
                    break
                if s == 0:
                    continue
                wc = 1 if c == 0 else 2
                total += wa * wb * wc * table[s]
    return total


def brute_lhs(variant: str, x: float, tables: DivisorTables) -> int:
    """Exact left-hand side for one of VARIANTS at x.

    tau3-box and tau-box sum over 1 <= n_i <= sqrt(x); identity-1.5-left sums
    tau3(|n|^2) over lattice points of Z^3 with 1 <= |n|^2 <= x;
    identity-1.5-right and tau3-ball both use sum_{n <= x} tau3(n) r3(n).
    """
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown variant {variant!r}")
    if x < 1:
        raise PreconditionError("x must be at least 1")
    if variant in ("tau3-box", "tau-box"):
        B = _isqrt_floor(x)
        tables.require(3 * B * B)
        table = tables.tau3 if variant == "tau3-box" else tables.tau
        return int(_box_sum(table, B))
    N = int(math.floor(x))
    tables.require(N)
    if variant == "identity-1.5-left":
        return int(_ball_sum(tables.tau3, N))
    r3 = r3_table(N)
    return int(np.dot(tables.tau3[1 : N + 1], r3[1:]))


def required_limit(variant: str, x: float) -> int:
    if variant in ("tau3-box", "tau-box"):
        return max(3, 3 * _isqrt_floor(x) ** 2)
    return max(1, int(math.floor(x)))


@dataclass(frozen=True)
class ComparisonReport:
    variant: str
    x: float
    lhs: int
    t1: float
    t2: float
    t3: float
    predicted: float
    ratio: float
    Q: int
    config: dict = field(default_factory=dict, compare=False)

    @property
    def main_terms(self) -> tuple[float, float, float]:
        return (self.t1, self.t2, self.t3)


@lru_cache(maxsize=16)
def _integrals(kind: str, method: str) -> tuple[float, float, float]:
    if method == "quadrature":
        return tuple(singular_integral(kind, ell).value for ell in range(3))
    if method == "oracle":
        return tuple(geometric_oracle(kind, ell) for ell in range(3))
    raise PreconditionError("integrals must be 'quadrature' or 'oracle'")


@lru_cache(maxsize=16)
def _series(Q: int) -> tuple[float, float, float]:
    return tuple(singular_series_partial(ell, Q).value for ell in range(3))


def main_coefficients(variant: str, Q: int = DEFAULT_Q, integrals: str = "quadrature",
                      normalization: str = "residue") -> tuple[float, float, float]:
    """Coefficients (A, B, C) of x^{3/2} (log x)^2, x^{3/2} log x, x^{3/2}."""
    if normalization not in NORMALIZATIONS:
        raise PreconditionError(f"normalization must be one of {NORMALIZATIONS}")
    C0, C1, C2 = _series(int(Q))
    if variant == "tau3-box":
        J0, J1, J2 = _integrals("J", integrals)
        A, B, C = C0 * J0 / 2, C1 * J0 + C0 * J1, C2 * J0 + C1 * J1 + 0.5 * C0 * J2
    elif variant == "tau3-ball":
        K0, K1, K2 = _integrals("K", integrals)
        A, B, C = 4 * C0 * K0, 8 * (C1 * K0 + C0 * K1), 8 * (C2 * K0 + C1 * K1 + 0.5 * C0 * K2)
    else:
        raise PreconditionError("predictions exist for tau3-box and tau3-ball only")
    if normalization == "halved":
        A, B, C = A / 2, B / 2, C / 2
    return A, B, C


def predict_main_terms(variant: str, x: float, Q: int = DEFAULT_Q,
                       quad_cfg: dict | None = None) -> tuple[float, float, float]:
    """(t1, t2, t3) at x; quad_cfg keys: integrals, normalization."""
    if Q < 64:
        raise PreconditionError("Q must be at least 64")
    cfg = {"integrals": "quadrature", "normalization": "residue", **(quad_cfg or {})}
    A, B, C = main_coefficients(variant, Q, cfg["integrals"], cfg["normalization"])
    L = math.log(x)
    x32 = x**1.5
    return A * x32 * L * L, B * x32 * L, C * x32


def compare(variant: str, x: float, tables: DivisorTables, Q: int = DEFAULT_Q,
            quad_cfg: dict | None = None) -> ComparisonReport:
    cfg = {"integrals": "quadrature", "normalization": "residue", **(quad_cfg or {})}
    lhs = brute_lhs(variant, x, tables)
    t1, t2, t3 = predict_main_terms(variant, x, Q, cfg)
    pred = t1 + t2 + t3
    ratio = lhs / pred if pred != 0 else float("nan")
    return ComparisonReport(variant, float(x), lhs, t1, t2, t3, pred, ratio, int(Q), dict(cfg))


def compare_sweep(variant: str, x_list, tables: DivisorTables, Q: int = DEFAULT_Q,
                  quad_cfg: dict | None = None) -> dict:
    """One report per x plus |ratio - 1| and its fitted power of x."""
    x_list = [float(x) for x in x_list]
    if not x_list:
        raise PreconditionError("x_list must be nonempty")
    if any(b <= a for a, b in zip(x_list, x_list[1:])):
        raise PreconditionError("x_list must be increasing")
    reports = [compare(variant, x, tables, Q, quad_cfg) for x in x_list]
    dev = [abs(r.ratio - 1) for r in reports]
    slope = float("nan")
    if len(x_list) >= 2 and all(d > 0 for d in dev):
        slope = float(np.polyfit(np.log(x_list), np.log(dev), 1)[0])
    return {"reports": reports, "abs_ratio_minus_one": dev, "fitted_exponent": slope}


def c5_stabilize(x_list, tables: DivisorTables | None = None, lhs_values=None,
                 shrink_factor: float = 1.2) -> dict:
    """(S(x) - L x^{3/2} log x) / x^{3/2} with L = 4 zeta(3) / (5 zeta(5)).

    S is the tau-box sum, or the supplied ``lhs_values``.  Reports the
    sequence, its consecutive differences, and whether each difference
    shrinks by ``shrink_factor`` per decade of x.
    """
    x_list = [float(x) for x in x_list]
    if len(x_list) < 3:
        raise PreconditionError("need at least three x values")
    if lhs_values is None:
        if tables is None:
            raise PreconditionError("tables or lhs_values required")
        lhs_values = [brute_lhs("tau-box", x, tables) for x in x_list]
    L = fundamental_constants().tau_variant_leading
    seq = [(s - L * x**1.5 * math.log(x)) / x**1.5 for s, x in zip(lhs_values, x_list)]
    deltas = [b - a for a, b in zip(seq, seq[1:])]
    checks = []
    for i in range(1, len(deltas)):
        decades = math.log10(x_list[i + 1] / x_list[i])
        need = shrink_factor**decades
        checks.append(abs(deltas[i]) * need <= abs(deltas[i - 1]))
    return {
        "x": x_list,
        "leading_constant": L,
        "estimates": seq,
        "successive_deltas": deltas,
        "strictly_shrinking": all(abs(b) < abs(a) for a, b in zip(deltas, deltas[1:])),
        "shrinks_by_factor": all(checks),
        "estimate": seq[-1],
    }
