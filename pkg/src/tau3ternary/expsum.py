"""Gauss sums, Kloosterman sums and the cubic character sum C with its
multiplicative factorization.

Values are returned as Python ``complex``.  Scalar sums accumulate the real
and imaginary parts with ``math.fsum``; batched helpers use FFTs over
residue histograms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .arith import (
    divisors,
    factor_for_charsum,
    factorize,
    is_prime,
    jacobi_symbol,
    mod_inverse,
    tau,
)
from .errors import EvenModulusError, PreconditionError

MAX_DIRECT_MODULUS = 10**6
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CharSumParams:
    """Arguments (b1, b2, b3, n, m, v) and modulus q of C, with n | q.

    m is signed; it carries the sign in front of m in the Kloosterman factor.
    """

    b1: int
    b2: int
    b3: int
    n: int
    m: int
    v: int
    q: int

    def __post_init__(self):
        if self.q < 1 or self.n < 1 or self.q % self.n:
            raise PreconditionError("n must be a positive divisor of q")

    @property
    def b(self) -> tuple[int, int, int]:
        return (self.b1, self.b2, self.b3)


def _check_modulus(q: int) -> None:
    if q < 1:
        raise PreconditionError("modulus must be positive")
    if q > MAX_DIRECT_MODULUS:
        raise PreconditionError(f"modulus {q} exceeds the direct-mode cap")


@lru_cache(maxsize=64)
def _roots(q: int) -> np.ndarray:
    """e(r/q) for r = 0..q-1."""
    return np.exp(1j * TWO_PI * np.arange(q) / q)


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def e(x: float) -> complex:
    return cmath.exp(1j * TWO_PI * x)


@numba.njit(cache=True)
def _inverse_table(c):
    """inv[x] = x^{-1} mod c for units x, and -1 for non-units."""
    inv = np.full(c, -1, np.int64)
    if c == 1:
        inv[0] = 0
        return inv
    for x in range(1, c):
        if inv[x] != -1:
            continue
        r0, r1 = c, x
        s0, s1 = 0, 1
        while r1:
            qq = r0 // r1
            r0, r1 = r1, r0 - qq * r1
            s0, s1 = s1, s0 - qq * s1
        if r0 == 1:
            y = s0 % c
            inv[x] = y
            inv[y] = x
    return inv


@lru_cache(maxsize=256)
def inverse_table(c: int) -> np.ndarray:
    t = _inverse_table(c)
    t.flags.writeable = False
    return t


def units(c: int) -> np.ndarray:
    return np.nonzero(inverse_table(c) >= 0)[0]


def gauss_sum(a: int, b: int, q: int) -> complex:
    """G(a, b; q) = sum over d mod q of e((a d^2 + b d)/q), by direct summation."""
    _check_modulus(q)
    a %= q
    b %= q
    d = np.arange(q, dtype=np.int64)
    return _fsum_complex(_roots(q)[(a * d % q * d + b * d) % q])


def epsilon(q: int) -> complex:
    """1 for q = 1 mod 4, i for q = 3 mod 4."""
    if q % 2 == 0:
        raise EvenModulusError("epsilon is defined for odd moduli")
    return 1.0 if q % 4 == 1 else 1j


def gauss_sum_closed(a: int, b: int, q: int) -> complex:
    """G(a, b; q) for odd q and gcd(a, q) = 1 via the quadratic-character formula."""
    if q < 1 or q % 2 == 0:
        raise PreconditionError("closed form needs an odd modulus")
    if math.gcd(a, q) != 1:
        raise PreconditionError("closed form needs gcd(a, q) = 1")
    if q == 1:
        return 1.0 + 0j
    r = mod_inverse(4, q) * mod_inverse(a, q) % q * (b * b % q) % q
    return e(-r / q) * jacobi_symbol(a, q) * epsilon(q) * math.sqrt(q)


def kloosterman(a: int, b: int, c: int) -> complex:
    """S(a, b; c) = sum over units x mod c of e((a x + b xbar)/c)."""
    _check_modulus(c)
    a %= c
    b %= c
    x = units(c)
    xb = inverse_table(c)[x]
    return _fsum_complex(_roots(c)[(a * x + b * xb) % c])


def gauss_row(b: int, q: int) -> np.ndarray:
    """G(a, b; q) for every a = 0..q-1 in O(q log q).

    Grouping d by d^2 mod q gives G(a, b; q) = sum_r W(r) e(a r/q) with
    W(r) = sum over d^2 = r of e(b d/q), an inverse DFT of W.
    """
    d = np.arange(q, dtype=np.int64)
    W = np.zeros(q, complex)
    np.add.at(W, d * d % q, _roots(q)[(b % q) * d % q])
    return np.fft.ifft(W) * q


def kloosterman_row(b: int, c: int) -> np.ndarray:
    """S(x, b; c) for every x = 0..c-1 as an inverse DFT over units."""
    V = np.zeros(c, complex)
    x = units(c)
    V[x] = _roots(c)[(b % c) * inverse_table(c)[x] % c]
    return np.fft.ifft(V) * c


def kloosterman_matrix(c: int) -> np.ndarray:
    """S(a, b; c) for all a, b mod c as a product of two character matrices."""
    x = units(c)
    xb = inverse_table(c)[x]
    r = np.arange(c, dtype=np.int64)
    E = _roots(c)[np.outer(r, x) % c]
    F = _roots(c)[np.outer(xb, r) % c]
    return E @ F


def charsum_C_direct(p: CharSumParams) -> complex:
    """C(b1, b2, b3, n, m, v; q) summed over units a mod q straight from its definition."""
    q = p.q
    _check_modulus(q)
    c = q // p.n
    a = units(q)
    abar = inverse_table(q)[a]
    d = np.arange(q, dtype=np.int64)
    roots = _roots(q)
    sq = np.outer(a, d * d % q) % q
    total = _roots(q)[(-abar * (p.v % q)) % q].astype(complex)
    for b in p.b:
        total = total * roots[(sq + (b % q) * d) % q].sum(axis=1)
    x = units(c)
    xb = inverse_table(c)[x]
    kl = _roots(c)[(np.outer(-abar % c, x) + (p.m % c) * xb) % c].sum(axis=1)
    return _fsum_complex(total * kl)


def _local_factor(q: int, v: int, b: tuple[int, ...], A: int, B: int, kmod: int) -> complex:
    """sum over units g mod q of e(-gbar v/q) prod G(g, b_i; q) S(-gbar A, B; kmod).

    kmod divides q.  This is one factor of the multiplicative splitting of C.
    """
    if q == 1:
        return 1.0 + 0j
    g = units(q)
    gbar = inverse_table(q)[g]
    val = _roots(q)[(-gbar * (v % q)) % q].astype(complex)
    for bi in b:
        val = val * gauss_row(bi, q)[g]
    if kmod > 1:
        krow = kloosterman_row(B % kmod, kmod)
        val = val * krow[(-gbar * (A % kmod)) % kmod]
    return _fsum_complex(val)


def charsum_C_factored(p: CharSumParams) -> complex:
    """C as C* x C2** x prod over primes of q3_sf of T, each at its own modulus."""
    f = factor_for_charsum(p.q, p.n)
    qp = f.q_prime
    qhat = qp // p.n
    b = p.b
    total = 1.0 + 0j
    # C*: modulus q' = q1 q2, Kloosterman at q' / n.
    if qp > 1:
        q3inv = mod_inverse(f.q3, qhat) if qhat > 1 else 1
        total *= _local_factor(qp, p.v, b, f.q3, p.m * q3inv * q3inv, qhat)
    # C2**: modulus q3_ff.
    if f.q3_ff > 1:
        qhinv = mod_inverse(qhat, f.q3_ff)
        sfinv = mod_inverse(f.q3_sf, f.q3_ff)
        total *= _local_factor(
            f.q3_ff, p.v, b, f.q3_sf * qp, p.m * (qhinv * sfinv) ** 2, f.q3_ff
        )
    # C1**: one twisted sum per prime of q3_sf.
    for pr, _ in factorize(f.q3_sf) if f.q3_sf > 1 else ():
        pp = f.q3_sf // pr
        r1 = qp * f.q3_ff * pp
        w = mod_inverse(qhat * f.q3_ff * pp, pr)
        total *= twisted_T(*b, r1, p.m * w * w, p.v, pr)
    return total


def _check_odd_prime(p: int) -> None:
    if p % 2 == 0 or not is_prime(p):
        raise EvenModulusError(f"twisted sum needs an odd prime modulus, got {p}")


def twisted_T(b1: int, b2: int, b3: int, r1: int, r2m: int, v: int, p: int,
              method: str = "reduced") -> complex:
    """Twisted sum T = sum over units z of e(-v zbar/p) prod G(z, b_i; p) S(-r1 zbar, r2m; p).

    method "reduced" uses the Gauss closed forms to collapse the three Gauss
    sums into eps_p^3 p^{3/2} (z/p) e(-4bar(4v + sum b^2) zbar/p); "brute"
    evaluates every factor directly.
    """
    _check_odd_prime(p)
    if method == "brute":
        z = units(p)
        zbar = inverse_table(p)[z]
        val = np.array([e(-(v * int(zb) % p) / p) for zb in zbar])
        for bi in (b1, b2, b3):
            val = val * np.array([gauss_sum(int(zz), bi, p) for zz in z])
        val = val * np.array([kloosterman(-r1 * int(zb), r2m, p) for zb in zbar])
        return _fsum_complex(val)
    if method != "reduced":
        raise PreconditionError(f"unknown method {method!r}")
    return _twisted_reduced(p, (4 * v + b1 * b1 + b2 * b2 + b3 * b3) % p, r1 % p, r2m % p)


def _legendre_vector(p: int) -> np.ndarray:
    """(z/p) for z = 0..p-1 from the squares table."""
    chi = -np.ones(p)
    chi[np.unique(np.arange(1, p, dtype=np.int64) ** 2 % p)] = 1.0
    chi[0] = 0.0
    return chi


def _twisted_reduced(p: int, c: int, r1: int, r2m: int) -> complex:
    z = units(p)
    zbar = inverse_table(p)[z]
    r0 = (-mod_inverse(4, p) * c) % p
    krow = kloosterman_row(r2m, p)
    val = _legendre_vector(p)[z] * _roots(p)[(r0 * zbar) % p] * krow[(-r1 * zbar) % p]
    return epsilon(p) ** 3 * p**1.5 * _fsum_complex(val)


def twisted_T_closed(b1: int, b2: int, b3: int, r1: int, r2m: int, v: int, p: int) -> complex | None:
    """Closed form of T in its two degenerate regimes, else None.

    p | r2m: -eps_p^4 p^2 (r0/p) with r0 = -4bar(4v + sum b^2).
    p does not divide r2m but divides 4v + sum b^2: eps_p^5 p^{5/2} (-r1 r2m / p).
    Both assume p does not divide r1.
    """
    _check_odd_prime(p)
    if r1 % p == 0:
        return None
    c = (4 * v + b1 * b1 + b2 * b2 + b3 * b3) % p
    eps = epsilon(p)
    if r2m % p == 0:
        r0 = (-mod_inverse(4, p) * c) % p
        return -(eps**4) * p**2 * jacobi_symbol(r0, p)
    if c == 0:
        return eps**5 * p**2.5 * jacobi_symbol(-r1 * r2m, p)
    return None


def weil_ratio(a: int, b: int, c: int, value: complex | None = None) -> float:
    """|S(a, b; c)| / (tau(c) sqrt(gcd(a, b, c)) sqrt(c))."""
    s = kloosterman(a, b, c) if value is None else value
    g = math.gcd(math.gcd(a, b), c)
    return abs(s) / (tau(c) * math.sqrt(g) * math.sqrt(c))


def weil_survey(c_max: int) -> dict:
    """Exhaustive Weil-bound check over all c <= c_max and all a, b mod c."""
    worst = (0.0, None)
    max_imag = 0.0
    max_asym = 0.0
    for c in range(1, c_max + 1):
        S = kloosterman_matrix(c)
        max_imag = max(max_imag, float(np.abs(S.imag).max()))
        max_asym = max(max_asym, float(np.abs(S - S.T).max()))
        r = np.arange(c)
        g = np.gcd(np.gcd.outer(r, r), c)
        ratio = np.abs(S) / (tau(c) * np.sqrt(g) * math.sqrt(c))
        i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[i, j] > worst[0]:
            worst = (float(ratio[i, j]), (int(i), int(j), c))
    return {
        "c_max": c_max,
        "max_weil_ratio": worst[0],
        "argmax_abc": list(worst[1]) if worst[1] else None,
        "max_abs_imag": max_imag,
        "max_symmetry_defect": max_asym,
    }


def _odd_primes(lo: int, hi: int) -> list[int]:
    return [p for p in range(max(3, lo), hi + 1) if is_prime(p)]


def bound_survey(prime_max: int, samples_per_prime: int, seed: int = 0,
                 exhaustive_primes: tuple[int, ...] = (3, 5, 7, 11, 13),
                 weil_c_max: int = 60) -> dict:
    """Empirical constants for |T| / p^{5/2} and the Weil ratio.

    For primes in ``exhaustive_primes`` the survey runs over every effective
    parameter (4v + sum b^2 mod p, r1 mod p a unit, r2m mod p) of the reduced
    form, and checks both degenerate closed forms against brute force over
    every (b, v, r1, r2m) with b fixed to zero and v ranging mod p.  All other
    odd primes up to prime_max get ``samples_per_prime`` tuples drawn from a
    counter-based generator keyed by the seed.
    """
    if prime_max < 3:
        raise PreconditionError("prime_max must be at least 3")
    rows = []
    closed_err = 0.0
    closed_checked = 0
    for p in _odd_primes(3, prime_max):
        best = (-1.0, None)
        if p in exhaustive_primes:
            for c in range(p):
                for r1 in range(1, p):
                    for r2m in range(p):
                        t = _twisted_reduced(p, c, r1, r2m)
                        ratio = abs(t) / p**2.5
                        if ratio > best[0]:
                            best = (ratio, (0, 0, 0, r1, r2m, c * mod_inverse(4, p) % p))
            for v in range(p):
                for r1 in range(1, p):
                    for r2m in range(p):
                        cf = twisted_T_closed(0, 0, 0, r1, r2m, v, p)
                        if cf is None:
                            continue
                        bf = twisted_T(0, 0, 0, r1, r2m, v, p, method="brute")
                        closed_err = max(closed_err, abs(bf - cf))
                        closed_checked += 1
            mode = "exhaustive"
        else:
            rng = np.random.Generator(np.random.Philox(key=[seed, p]))
            draws = rng.integers(0, p, size=(samples_per_prime, 6))
            draws[:, 3] = rng.integers(1, p, size=samples_per_prime)
            for b1, b2, b3, r1, r2m, v in draws.tolist():
                t = twisted_T(b1, b2, b3, r1, r2m, v, p)
                ratio = abs(t) / p**2.5
                if ratio > best[0]:
                    best = (ratio, (b1, b2, b3, r1, r2m, v))
            mode = "sampled"
        rows.append({"p": p, "mode": mode, "max_ratio": best[0], "argmax": list(best[1])})
    rows.sort(key=lambda r: r["p"])
    return {
        "prime_max": prime_max,
        "samples_per_prime": samples_per_prime,
        "seed": seed,
        "per_prime": rows,
        "max_T_ratio": max(r["max_ratio"] for r in rows),
        "closed_form_max_error": closed_err,
        "closed_form_cases": closed_checked,
        "weil": weil_survey(weil_c_max),
    }


def prop51_ratio(p: CharSumParams, value: complex | None = None) -> float:
    """|C| / ((q1 q2)^3 q3_sf^{5/2} q3_ff^3 / sqrt(n)), the shape of the C bound.

    The square-full part q3_ff enters with exponent 3, matching the bound for
    the C2** factor.
    """
    f = factor_for_charsum(p.q, p.n)
    c = charsum_C_direct(p) if value is None else value
    scale = float(f.q_prime) ** 3 * float(f.q3_sf) ** 2.5 * float(f.q3_ff) ** 3 / math.sqrt(p.n)
    return abs(c) / scale


def sample_charsum_params(count: int, q_max: int, seed: int = 0) -> list[CharSumParams]:
    """Deterministic parameter tuples with q <= q_max and n | q."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0xC5]))
    out = []
    for _ in range(count):
        q = int(rng.integers(1, q_max + 1))
        divs = divisors(q)
        n = int(divs[int(rng.integers(0, len(divs)))])
        b1, b2, b3, m, v = (int(x) for x in rng.integers(-q, q + 1, size=5))
        out.append(CharSumParams(b1, b2, b3, n, m, v, q))
    return out
