"""Voronoi summation for tau3 twisted by e(an/q): test windows, Mellin
moments, the Phi_k kernels (contour integral and first-order asymptotic) and
a two-sided residual check.

Kernel, in the shifted form used throughout:

    Phi_k(y) = (pi^3 y)^k / (2 pi i) int_{Re s = sigma} (pi^3 y)^{-s}
               Gamma((1+s+k)/2)^3 / Gamma((k-s)/2)^3 phi~(-s) ds

where phi~ is the Mellin transform of u -> phi(u/X) e(-beta u).  The
unshifted form (Gamma((1+s+2k)/2)^3 / Gamma(-s/2)^3 phi~(-s-k)) is the same
integral after s -> s + k, so its legal strip sigma > -1 - 2k is the image
of sigma > -1 - k here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import loggamma

from .arith import DivisorTables, divisors, sieve_divisor_tables, sigma00, tau
from .errors import (
    NonConvergenceError,
    NotInvertibleError,
    PreconditionError,
    RegimeError,
    UnsupportedOrderError,
)
from .expsum import kloosterman
from .special import P_ell

PI3 = math.pi**3
TAIL_RTOL = 1e-8

# First-order stationary-phase coefficients (a_k(1), b_k(1)).
_C = 2.0 * math.sqrt(3.0 * math.pi) / (6.0 * math.pi)
ASYMPTOTIC_COEFFS = {
    0: (-_C / 1j, _C / 1j),
    1: (-_C, -_C),
}


def _ramp(t):
    """Smooth step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t)."""
    t = np.asarray(t, float)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        f1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f0 / (f0 + f1)


@lru_cache(maxsize=1)
def ramp_derivative_constant(jmax: int = 4, n: int = 200001) -> float:
    """c with max |rho^{(j)}| <= c^j for j <= jmax, measured on a fine grid.

    The window's j-th derivative in y is M^j rho^{(j)}, so this c also bounds
    phi^{(j)} by (c M)^j.
    """
    t = np.linspace(0.0, 1.0, n)
    h = t[1] - t[0]
    d = _ramp(t)
    c = 0.0
    for j in range(1, jmax + 1):
        d = np.gradient(d, h)
        c = max(c, float(np.max(np.abs(d[j : n - j]))) ** (1.0 / j))
    return c


@dataclass(frozen=True)
class TestWindow:
    """u -> phi(u/X) with phi supported on [1/2, 1] and equal to 1 on
    [1/2 + 1/M, 1 - 1/M]."""

    __test__ = False  # not a pytest class

    X: float
    M: float

    def profile(self, y):
        y = np.asarray(y, float)
        return _ramp((y - 0.5) * self.M) * _ramp((1.0 - y) * self.M)

    def __call__(self, u):
        return self.profile(np.asarray(u, float) / self.X)

    @property
    def derivative_constant(self) -> float:
        return ramp_derivative_constant()

    @property
    def support(self) -> tuple[float, float]:
        return 0.5 * self.X, self.X

    @property
    def plateau(self) -> tuple[float, float]:
        return self.X * (0.5 + 1.0 / self.M), self.X * (1.0 - 1.0 / self.M)


def make_bump(X: float, M: float) -> TestWindow:
    if X <= 0:
        raise PreconditionError("X must be positive")
    if M <= 4:
        raise PreconditionError("M must exceed 4")
    return TestWindow(float(X), float(M))


def mellin_moments(w: TestWindow, beta: float = 0.0) -> tuple[complex, complex, complex]:
    """(phi~_beta(1), phi~'_beta(1), phi~''_beta(1)): the integrals of
    phi(u/X) e(-beta u) (log u)^j over [X/2, X] for j = 0, 1, 2."""
    lo, hi = w.support
    pts = list(w.plateau)
    omega = 2.0 * math.pi * beta
    out = []
    for j in range(3):
        f = lambda u, j=j: float(w(u)) * math.log(u) ** j
        tol = 1e-13 * w.X * max(1.0, math.log(w.X)) ** j
        opts = dict(epsabs=tol, epsrel=1e-13, limit=500)
        if omega == 0:
            re = sum(integrate.quad(f, a, b, **opts)[0] for a, b in zip([lo] + pts, pts + [hi]))
            out.append(complex(re, 0.0))
            continue
        re = sum(integrate.quad(f, a, b, weight="cos", wvar=omega, **opts)[0]
                 for a, b in zip([lo] + pts, pts + [hi]))
        im = -sum(integrate.quad(f, a, b, weight="sin", wvar=omega, **opts)[0]
                  for a, b in zip([lo] + pts, pts + [hi]))
        out.append(complex(re, im))
    return tuple(out)


@dataclass(frozen=True)
class MellinConfig:
    """Vertical contour Re s = sigma truncated at |Im s| <= T with ``nodes``
    equally spaced points.  None means: choose from the window."""

    sigma: float = -0.5
    T: float | None = None
    nodes: int | None = None

    def resolve(self, w: TestWindow, k: int, beta: float = 0.0) -> "MellinConfig":
        if self.sigma <= -1 - k:
            raise PreconditionError(f"sigma={self.sigma} outside the strip sigma > {-1 - k}")
        T = self.T if self.T is not None else 500.0 * w.M + 2.5 * math.pi * abs(beta) * w.X
        if self.nodes is None:
            # Trapezoid aliasing on the sigma = -1/2 line reaches 1e-5 at
            # dt = 0.09; halving it brings the error to ~1e-11.
            dt = min(0.05, 2 * math.pi * (1 + k + self.sigma) / 70.0)
            nodes = int(math.ceil(2 * T / dt))
        else:
            nodes = int(self.nodes)
        if T <= 0 or nodes <= 0:
            raise PreconditionError("T and nodes must be positive")
        return MellinConfig(self.sigma, float(T), nodes)


@lru_cache(maxsize=32)
def _mellin_line(w: TestWindow, c: float, beta: float, dt: float, T: float):
    """t grid and phi~(c - i t) = int phi(u/X) e(-beta u) u^{c - 1 - i t} du.

    With c = -sigma this is phi~(-s) at s = sigma + i t.

    In v = log u this is the Fourier transform of
    g(v) = phi(e^v/X) e(-beta e^v) e^{c v}, taken by one FFT whose output
    spacing is dt.
    """
    N = 1 << int(math.ceil(math.log2(2 * T / dt + 1)))
    hv = 2 * math.pi / (N * dt)
    v0 = math.log(w.X / 2) - 0.05
    if N * hv < math.log(2) + 0.1:
        raise PreconditionError("contour spacing too coarse for the window support")
    v = v0 + hv * np.arange(N)
    ev = np.exp(v)
    g = w(ev) * np.exp(c * v) * np.exp(-2j * math.pi * beta * ev)
    F = np.fft.fft(g) * hv  # sum_j g_j e^{-2 pi i j k / N}
    kk = np.fft.fftfreq(N, 1.0 / N)
    t = kk * dt
    F = F * np.exp(-1j * t * v0)
    keep = np.abs(t) <= T
    order = np.argsort(t[keep])
    return t[keep][order], F[keep][order]


@lru_cache(maxsize=32)
def _kernel_integrand(w: TestWindow, k: int, sigma: float, T: float, nodes: int,
                      beta: float, form: str):
    """(s, I(s), dt): Phi_k(y) = (pi^3 y)^k dt/(2 pi) sum (pi^3 y)^{-s} I(s)."""
    dt = 2 * T / nodes
    if form == "shifted":
        t, F = _mellin_line(w, -sigma, beta, dt, T)  # phi~(-s) at s = sigma + i t
        s = sigma + 1j * t
        logratio = 3 * (loggamma((1 + s + k) / 2) - loggamma((k - s) / 2))
    elif form == "unshifted":
        t, F = _mellin_line(w, -sigma - k, beta, dt, T)  # phi~(-s-k)
        s = sigma + 1j * t
        logratio = 3 * (loggamma((1 + s + 2 * k) / 2) - loggamma(-s / 2))
    else:
        raise PreconditionError(f"unknown kernel form {form!r}")
    I = np.exp(logratio) * F
    order = np.argsort(s.imag)
    s, I = s[order], I[order]
    mag = np.abs(I)
    l1 = mag.sum() * dt
    edge = np.abs(s.imag) > 0.9 * T
    tail = mag[edge].sum() * dt
    if l1 == 0 or tail > TAIL_RTOL * l1:
        raise NonConvergenceError(
            f"contour tail {tail:.3g} exceeds {TAIL_RTOL:g} of integrand mass {l1:.3g}; raise T"
        )
    s.flags.writeable = False
    I.flags.writeable = False
    return s, I, dt


def _contour_sum(y: np.ndarray, s: np.ndarray, I: np.ndarray, dt: float) -> np.ndarray:
    logz = np.log(PI3 * y)
    out = np.empty(y.shape, complex)
    step = max(1, 4_000_000 // max(1, s.size))
    for i in range(0, y.size, step):
        lz = logz[i : i + step]
        out[i : i + step] = np.exp(-np.outer(lz, s)) @ I
    return out * dt / (2 * math.pi)


def phi_contour(y, k: int, w: TestWindow, cfg: MellinConfig | None = None,
                beta: float = 0.0, form: str = "shifted"):
    """Phi_k(y) by trapezoidal quadrature on a vertical line (vectorized in y).

    form "unshifted" integrates the other normalization of the same kernel,
    (pi^3 y)^{-s} Gamma((1+s+2k)/2)^3 / Gamma(-s/2)^3 phi~(-s-k), on the
    image line Re s = cfg.sigma - k under s -> s + k; both must agree.
    """
    if k not in (0, 1):
        raise PreconditionError("k must be 0 or 1")
    cfg = cfg or MellinConfig()
    yy = np.atleast_1d(np.asarray(y, float))
    if np.any(yy <= 0):
        raise PreconditionError("y must be positive")
    if form not in ("shifted", "unshifted"):
        raise PreconditionError(f"unknown kernel form {form!r}")
    r = cfg.resolve(w, k, beta)
    sigma = r.sigma if form == "shifted" else r.sigma - k
    s, I, dt = _kernel_integrand(w, k, sigma, r.T, r.nodes, float(beta), form)
    out = _contour_sum(yy, s, I, dt)
    if form == "shifted":
        out = (PI3 * yy) ** k * out
    return out[0] if np.ndim(y) == 0 else out


def phi_pm(y, sign: int, w: TestWindow, cfg: MellinConfig | None = None, beta: float = 0.0):
    """Phi^{+-}(y) = Phi_0(y) +- Phi_1(y) / (i pi^3 y) as one contour sum.

    In the shifted form the (pi^3 y)^k prefactor cancels the 1/(pi^3 y), so
    the fused integrand is I_0 - i sign I_1 on a shared grid.
    """
    cfg = cfg or MellinConfig()
    yy = np.atleast_1d(np.asarray(y, float))
    r0 = cfg.resolve(w, 0, beta)
    r1 = cfg.resolve(w, 1, beta)
    r = MellinConfig(cfg.sigma, max(r0.T, r1.T), max(r0.nodes, r1.nodes))
    s0, I0, dt = _kernel_integrand(w, 0, r.sigma, r.T, r.nodes, float(beta), "shifted")
    s1, I1, _ = _kernel_integrand(w, 1, r.sigma, r.T, r.nodes, float(beta), "shifted")
    if s0.shape != s1.shape or np.any(s0 != s1):
        raise PreconditionError("kernel grids differ")
    out = _contour_sum(yy, s0, I0 - 1j * sign * I1, dt)
    return out[0] if np.ndim(y) == 0 else out


def phi_asymptotic(y: float, k: int, w: TestWindow, terms: int = 1, beta: float = 0.0,
                   coefficients: dict | None = None) -> complex:
    """Stationary-phase expansion of Phi_k(y) for yX >= 100.

    sum_j (pi^3 y)^{k+1} int phi(u/X) e(-beta u) (a_k(j) e(3 (yu)^{1/3})
    + b_k(j) e(-3 (yu)^{1/3})) (pi^3 y u)^{-j/3} du.  Only j = 1 has known
    coefficients; pass ``coefficients={(k, j): (a, b)}`` for more terms.
    """
    if k not in (0, 1):
        raise PreconditionError("k must be 0 or 1")
    if y * w.X < 100:
        raise RegimeError(f"yX = {y * w.X:.3g} < 100")
    if terms < 1:
        raise PreconditionError("terms must be at least 1")
    coeffs = {(kk, 1): ab for kk, ab in ASYMPTOTIC_COEFFS.items()}
    if coefficients:
        coeffs.update(coefficients)
    for j in range(1, terms + 1):
        if (k, j) not in coeffs:
            raise UnsupportedOrderError(f"no coefficients for k={k}, j={j}")
    u, wts = _oscillatory_nodes(y, w, beta)
    amp = w(u) * np.exp(-2j * math.pi * beta * u)
    ph = np.exp(6j * math.pi * np.cbrt(y * u))
    total = 0j
    for j in range(1, terms + 1):
        a, b = coeffs[(k, j)]
        total += np.sum(wts * amp * (a * ph + b / ph) * (PI3 * y * u) ** (-j / 3))
    return complex((PI3 * y) ** (k + 1) * total)


def asymptotic_envelope(y: float, k: int, w: TestWindow) -> float:
    """L1 size of the leading asymptotic term:
    (pi^3 y)^{k+1} (|a_k(1)| + |b_k(1)|) int phi(u/X) (pi^3 y u)^{-1/3} du."""
    u, wts = _oscillatory_nodes(y, w, 0.0)
    a, b = ASYMPTOTIC_COEFFS[k]
    return float((PI3 * y) ** (k + 1) * (abs(a) + abs(b)) * np.sum(wts * w(u) * (PI3 * y * u) ** (-1 / 3)))


def _oscillatory_nodes(y: float, w: TestWindow, beta: float):
    lo, hi = w.support
    cycles = 3 * y ** (1 / 3) * (hi ** (1 / 3) - lo ** (1 / 3)) + abs(beta) * (hi - lo)
    panels = int(max(16 * w.M, 2 * cycles + 16))
    x, wt = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * wt[None, :]).ravel()
    return u, wts


def default_dual_cutoff(q: int, w: TestWindow) -> int:
    """ceil(8 q^3 M^3 / X)."""
    return int(math.ceil(8 * q**3 * w.M**3 / w.X))


def _main_bracket(n: int, q: int, moments) -> complex:
    m0, m1, m2 = moments
    return P_ell(2, n, q) * m0 + P_ell(1, n, q) * m1 + 0.5 * m2


def voronoi_terms(q: int, a: int, w: TestWindow, dual_cutoff: int | None = None,
                  tables: DivisorTables | None = None, cfg: MellinConfig | None = None) -> dict:
    """Every piece of both sides of the summation formula.

    Returns lhs, main (residue normalization: (1/q^2) sum_{n|q} n tau(n)
    S(0, abar; q/n) [P_2 phi~(1) + P_1 phi~'(1) + phi~''(1)/2]), and the
    cumulative dual sum after each m, so truncations up to dual_cutoff can be
    read off without recomputing kernels.
    """
    if q < 1:
        raise PreconditionError("need q >= 1")
    if math.gcd(a, q) != 1:
        raise NotInvertibleError(f"{a} is not invertible mod {q}")
    cut = default_dual_cutoff(q, w) if dual_cutoff is None else int(dual_cutoff)
    if cut < 1:
        raise PreconditionError("dual_cutoff must be positive")
    nmax = int(math.floor(w.X))
    if tables is None:
        tables = sieve_divisor_tables(nmax)
    tables.require(nmax)
    n = np.arange(1, nmax + 1)
    ph = np.exp(2j * math.pi * ((a * n) % q) / q)
    lhs = complex(np.sum(tables.tau3[1 : nmax + 1] * w(n) * ph))

    abar = pow(a, -1, q) if q > 1 else 0
    mom = mellin_moments(w)
    main = 0j
    for d in divisors(q):
        c = q // d
        main += d * tau(d) * kloosterman(0, abar, c) * _main_bracket(d, q, mom)
    main /= q * q

    ms = np.arange(1, cut + 1)
    dual = np.zeros(cut, complex)
    for d in divisors(q):
        c = q // d
        ys = ms * d * d / q**3
        pp = phi_pm(ys, +1, w, cfg)
        pm = phi_pm(ys, -1, w, cfg)
        coef = np.array([
            sum(sigma00(d // (n1 * n2), int(m)) for n1 in divisors(d) for n2 in divisors(d // n1))
            for m in ms
        ], float)
        klp = np.array([kloosterman(int(m), abar, c) for m in ms])
        klm = np.array([kloosterman(-int(m), abar, c) for m in ms])
        dual += coef / (d * ms) * (klp * pp + klm * pm)
    dual *= q / (2 * math.pi**1.5)
    return {
        "q": q, "a": a, "X": w.X, "M": w.M, "dual_cutoff": cut,
        "lhs": lhs, "main": main, "dual_cumulative": np.cumsum(dual),
    }


def voronoi_check(q: int, a: int, w: TestWindow, dual_cutoff: int | None = None,
                  tables: DivisorTables | None = None, cfg: MellinConfig | None = None,
                  normalization: str = "residue") -> dict:
    """|LHS - RHS| / |LHS| for the summation formula truncated at dual_cutoff.

    normalization "residue" uses main-term weights (1, 1, 1/2) on
    (phi~, phi~', phi~''); "halved" halves them.  Both residuals are
    always reported.
    """
    if normalization not in ("residue", "halved"):
        raise PreconditionError("normalization must be 'residue' or 'halved'")
    t = voronoi_terms(q, a, w, dual_cutoff, tables, cfg)
    lhs, main, dual = t["lhs"], t["main"], complex(t["dual_cumulative"][-1])
    res = abs(lhs - main - dual) / abs(lhs)
    res_half = abs(lhs - 0.5 * main - dual) / abs(lhs)
    chosen = main if normalization == "residue" else 0.5 * main
    return {
        "q": q, "a": a, "X": w.X, "M": w.M, "dual_cutoff": t["dual_cutoff"],
        "normalization": normalization,
        "lhs": lhs, "main": chosen, "dual": dual,
        "residual": res if normalization == "residue" else res_half,
        "residual_residue": res, "residual_halved": res_half,
    }
