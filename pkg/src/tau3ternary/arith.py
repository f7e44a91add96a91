"""Integer kernel: divisor sieves, three-square counts, modular helpers.

The sieve builds tau with a linear sieve and then tau3 with a single
Dirichlet-convolution pass, so both tables are auditable against direct
enumeration.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numba
import numpy as np

from .errors import (
    EvenModulusError,
    LimitTooLargeError,
    NotInvertibleError,
    PreconditionError,
    TablesTooSmallError,
)

# Peak bytes per sieved integer: tau, tau3 (int64), exponent scratch (int32),
# and a generous allowance for the prime list.
_BYTES_PER_ENTRY = 8 + 8 + 4 + 4
DEFAULT_MEMORY_BUDGET = 2 * 1024**3

CACHE_MAGIC = b"TAU3TBL\0"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sII q")


@dataclass(frozen=True, eq=False)
class DivisorTables:
    """tau(n) and tau3(n) for 0 <= n <= limit (index 0 holds 0)."""

    limit: int
    tau: np.ndarray
    tau3: np.ndarray

    def __post_init__(self):
        for arr in (self.tau, self.tau3):
            if arr.shape != (self.limit + 1,):
                raise PreconditionError("table length must be limit + 1")
            arr.flags.writeable = False

    def require(self, n: int) -> None:
        if n > self.limit:
            raise TablesTooSmallError(f"tables reach {self.limit}, need {n}")


@numba.njit(cache=True)
def _linear_sieve_tau(N):
    tau = np.zeros(N + 1, np.int64)
    expo = np.zeros(N + 1, np.int32)
    primes = np.empty(max(16, int(1.3 * N / max(1.0, math.log(N + 1))) + 16), np.int64)
    n_primes = 0
    if N >= 1:
        tau[1] = 1
    for i in range(2, N + 1):
        if tau[i] == 0:
            primes[n_primes] = i
            n_primes += 1
            tau[i] = 2
            expo[i] = 1
        for j in range(n_primes):
            p = primes[j]
            if p * i > N:
                break
            if i % p == 0:
                e = expo[i]
                expo[i * p] = e + 1
                tau[i * p] = tau[i] // (e + 1) * (e + 2)
                break
            expo[i * p] = 1
            tau[i * p] = tau[i] * 2
    return tau


@numba.njit(cache=True)
def _convolve_tau3(tau):
    N = tau.shape[0] - 1
    tau3 = np.zeros(N + 1, np.int64)
    for d in range(1, N + 1):
        k = 1
        for m in range(d, N + 1, d):
            tau3[m] += tau[k]
            k += 1
    return tau3


def sieve_divisor_tables(N: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DivisorTables:
    """Sieve tau and tau3 up to N in O(N log N) time and O(N) memory."""
    N = int(N)
    if N < 1:
        raise PreconditionError("N must be at least 1")
    if N > np.iinfo(np.int64).max // 64:
        raise LimitTooLargeError("N exceeds the native integer width")
    if (N + 1) * _BYTES_PER_ENTRY > memory_budget:
        raise LimitTooLargeError(
            f"N={N} needs ~{(N + 1) * _BYTES_PER_ENTRY} bytes, budget {memory_budget}"
        )
    tau = _linear_sieve_tau(N)
    return DivisorTables(N, tau, _convolve_tau3(tau))


def save_tables(tables: DivisorTables, path: str | Path) -> None:
    """Write tables as magic, version, limit, then little-endian int64 tau and tau3."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, 0, tables.limit))
        fh.write(tables.tau.astype("<i8").tobytes())
        fh.write(tables.tau3.astype("<i8").tobytes())
    tmp.replace(path)


def load_tables(path: str | Path) -> DivisorTables:
    with open(path, "rb") as fh:
        magic, version, _, limit = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise OSError(f"{path}: not a version-{CACHE_VERSION} table cache")
        body = np.frombuffer(fh.read(), dtype="<i8")
    if body.size != 2 * (limit + 1):
        raise OSError(f"{path}: truncated table cache")
    return DivisorTables(
        int(limit), body[: limit + 1].astype(np.int64), body[limit + 1 :].astype(np.int64)
    )


def cached_tables(N: int, cache_dir: str | Path | None = None) -> DivisorTables:
    """Sieve to N, reusing any cache file in cache_dir that reaches N."""
    if cache_dir is None:
        return sieve_divisor_tables(N)
    cache_dir = Path(cache_dir)
    for f in sorted(cache_dir.glob("tables_*.bin")):
        try:
            lim = int(f.stem.split("_")[1])
        except (IndexError, ValueError):
            continue
        if lim >= N:
            return load_tables(f)
    tables = sieve_divisor_tables(N)
    save_tables(tables, cache_dir / f"tables_{N}.bin")
    return tables


@numba.njit(cache=True)
def _r3_all(n):
    count = 0
    r = int(math.sqrt(n))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    for a in range(-r, r + 1):
        rem = n - a * a
        for b in range(-r, r + 1):
            c2 = rem - b * b
            if c2 < 0:
                continue
            c = int(math.sqrt(c2))
            while c * c > c2:
                c -= 1
            while (c + 1) * (c + 1) <= c2:
                c += 1
            if c * c == c2:
                count += 1 if c == 0 else 2
    return count


@numba.njit(cache=True)
def _r3_box(n, B):
    count = 0
    for a in range(1, B + 1):
        rem = n - a * a
        if rem < 2:
            break
        for b in range(1, B + 1):
            c2 = rem - b * b
            if c2 < 1:
                break
            c = int(math.sqrt(c2))
            while c * c > c2:
                c -= 1
            while (c + 1) * (c + 1) <= c2:
                c += 1
            if c * c == c2 and c <= B:
                count += 1
    return count


def r3_counts(n: int, mode: str = "all-integers", box_bound: float | None = None) -> int:
    """Number of representations n = n1^2 + n2^2 + n3^2.

    mode "all-integers" counts (n1, n2, n3) in Z^3; "positive-box" restricts
    every coordinate to [1, box_bound].
    """
    n = int(n)
    if n < 1:
        raise PreconditionError("n must be positive")
    if mode == "all-integers":
        return int(_r3_all(n))
    if mode == "positive-box":
        if box_bound is None:
            raise PreconditionError("positive-box mode needs box_bound")
        return int(_r3_box(n, int(math.floor(box_bound))))
    raise PreconditionError(f"unknown mode {mode!r}")


def r3_table(N: int) -> np.ndarray:
    """r3(n) for 0 <= n <= N over all of Z^3, by convolving square indicators."""
    N = int(N)
    r1 = np.zeros(N + 1, np.int64)
    k = 0
    while k * k <= N:
        r1[k * k] += 1 if k == 0 else 2
        k += 1
    squares = np.nonzero(r1)[0]
    out = r1.copy()
    for _ in range(2):
        acc = np.zeros(N + 1, np.int64)
        for s in squares:
            acc[s:] += r1[s] * out[: N + 1 - s]
        out = acc
    return out


def sigma00(k: int, l: int) -> int:
    """Pairs (d1, d2) with d1 | l, d2 | l/d1 and gcd(d2, k) = 1."""
    if k < 1 or l < 1:
        raise PreconditionError("k and l must be positive")
    return sum(
        1 for d1 in divisors(l) for d2 in divisors(l // d1) if math.gcd(d2, k) == 1
    )


def mod_inverse(a: int, q: int) -> int:
    """Inverse of a modulo q, returned in [1, q]."""
    if q < 1:
        raise PreconditionError("modulus must be positive")
    if math.gcd(a, q) != 1:
        raise NotInvertibleError(f"gcd({a}, {q}) > 1")
    r = pow(a % q, -1, q) if q > 1 else 0
    return r if r else q


def jacobi_symbol(a: int, q: int) -> int:
    if q < 1 or q % 2 == 0:
        raise EvenModulusError(f"Jacobi symbol needs an odd positive modulus, got {q}")
    a %= q
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if q % 8 in (3, 5):
                result = -result
        a, q = q, a
        if a % 4 == 3 and q % 4 == 3:
            result = -result
        a %= q
    return result if q == 1 else 0


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization by trial division, as ((p, e), ...) in ascending p."""
    if n < 1:
        raise PreconditionError("n must be positive")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


@lru_cache(maxsize=4096)
def divisors(n: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return tuple(sorted(divs))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def tau(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


@dataclass(frozen=True)
class TriFactorization:
    q: int
    n: int
    q1: int
    q2: int
    q3: int
    q3_sf: int
    q3_ff: int

    @property
    def q_prime(self) -> int:
        return self.q1 * self.q2


def factor_for_charsum(q: int, n: int) -> TriFactorization:
    """Split q = q1 q2 q3 and q3 = q3_sf q3_ff.

    A prime power p^e || q goes to q1 when p^e | n, to q2 when p | n only,
    and to q3 otherwise.  Inside q3, odd primes with e = 1 form q3_sf.
    """
    if q < 1 or n < 1 or q % n:
        raise PreconditionError("n must be a positive divisor of q")
    q1 = q2 = q3_sf = q3_ff = 1
    for p, e in factorize(q):
        pe = p**e
        if n % p == 0:
            if n % pe == 0:
                q1 *= pe
            else:
                q2 *= pe
        elif p != 2 and e == 1:
            q3_sf *= p
        else:
            q3_ff *= pe
    return TriFactorization(q, n, q1, q2, q3_sf * q3_ff, q3_sf, q3_ff)


def divisor_log_sums(n: int) -> tuple[float, float]:
    """(sum of log d, sum of (log d)^2) over the divisors d of n."""
    if n < 1:
        raise PreconditionError("n must be positive")
    logs = [math.log(d) for d in divisors(n)]
    return math.fsum(logs), math.fsum(x * x for x in logs)
