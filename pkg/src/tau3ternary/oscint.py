"""Oscillatory integrals: the unit Fresnel integral, window transforms and
the singular integrals J_l, K_l, I_l(X), with a geometric oracle.

Conventions: e(x) = exp(2 pi i x), omega = 2 pi beta, log is natural.

    J_l    = int_R (int_0^3 (log u)^l e(-beta u) du) F(beta)^3 dbeta
    K_l    = same with inner range [0, 1]
    I_l(X) = same with inner range [X/(2x), X/x]
    F(beta) = int_0^1 e(beta v^2) dv

Fourier inversion turns each of these into the integral of (log|v|^2)^l over
the part of [0,1]^3 whose |v|^2 lies in the inner range; that is what
``geometric_oracle`` computes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import NonConvergenceError, PreconditionError

EULER_GAMMA = 0.57721566490153286061
PSI0_BOUND_C = 0.5  # |Psi_0(beta)| sqrt|beta| = |C(z) + i S(z)| / 2 <= 1/2

_SERIES_SWITCH = 8.0  # |omega c| below which the power series is used
_LAG_X, _LAG_W = special.roots_laguerre(48)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_GL2_X, _GL2_W = np.polynomial.legendre.leggauss(14)

TAIL_TOL = 1e-6
ERR_LIMIT = 1e-3


@dataclass(frozen=True)
class OscIntegralResult:
    value: float
    err_estimate: float
    method: str
    beta_cutoff: float
    node_count: int
    kind: str = ""
    ell: int = 0


def fresnel_unit(beta):
    """int_0^1 e(beta v^2) dv, vectorized over beta.

    With z = 2 sqrt|beta| this is (C(z) + i S(z)) / z in the normalized
    Fresnel functions, conjugated for beta < 0.  Near zero the Taylor series
    sum (2 pi i beta)^k / (k! (2k+1)) is used.
    """
    b = np.asarray(beta, dtype=float)
    out = np.empty(b.shape, complex)
    ab = np.abs(b)
    small = ab < 1e-3
    if np.any(small):
        w = 2j * np.pi * ab[small]
        acc = np.zeros(w.shape, complex)
        term = np.ones(w.shape, complex)
        for k in range(12):
            acc += term / (2 * k + 1)
            term = term * w / (k + 1)
        out[small] = acc
    big = ~small
    if np.any(big):
        z = 2.0 * np.sqrt(ab[big])
        S, C = special.fresnel(z)
        out[big] = (C + 1j * S) / z
    out = np.where(b < 0, np.conj(out), out)
    return out[()] if out.ndim == 0 else out


def psi0(beta, x: float):
    """int_0^{sqrt x} e(beta u^2) du = sqrt(x) F(beta x)."""
    if x <= 0:
        raise PreconditionError("x must be positive")
    return math.sqrt(x) * fresnel_unit(np.asarray(beta, float) * x)


def _log_moments(ell: int, c: float, m: np.ndarray) -> np.ndarray:
    """int_0^c (log u)^ell u^{m-1} du for an array of m >= 1."""
    if c == 0.0:
        return np.zeros(m.shape)
    L = math.log(c)
    acc = np.zeros(m.shape)
    for j in range(ell + 1):
        acc += (-1) ** j * math.factorial(ell) / math.factorial(ell - j) * L ** (ell - j) / m ** (j + 1)
    return acc * c**m


def _w_series(omega: np.ndarray, ell: int, c: float) -> np.ndarray:
    kmax = 60
    k = np.arange(kmax, dtype=float)
    mom = _log_moments(ell, c, k + 1)  # int_0^c (log u)^ell u^k du
    out = np.zeros(omega.shape, complex)
    term = np.ones(omega.shape, complex)
    for kk in range(kmax):
        out += term * mom[kk]
        term = term * (-1j * omega) / (kk + 1)
    return out


def _w_full_line(omega: np.ndarray, ell: int) -> np.ndarray:
    """Abel-regularized int_0^inf (log u)^ell e^{-i omega u} du."""
    p = 1j * omega
    L = np.log(np.abs(omega)) + 0.5j * np.pi * np.sign(omega)
    if ell == 0:
        return 1 / p
    if ell == 1:
        return -(EULER_GAMMA + L) / p
    return ((EULER_GAMMA + L) ** 2 + np.pi**2 / 6) / p


def _w_tail(omega: np.ndarray, ell: int, c: float) -> np.ndarray:
    """int_c^inf (log u)^ell e^{-i omega u} du, with the ray rotated to
    u = c - i sign(omega) s/|omega| and Gauss-Laguerre in s."""
    sg = np.sign(omega)
    aw = np.abs(omega)
    pref = -1j * sg * np.exp(-1j * omega * c) / aw
    if ell == 0:
        return pref
    u = c - 1j * sg[:, None] * _LAG_X[None, :] / aw[:, None]
    return pref * ((np.log(u) ** ell) @ _LAG_W)


def _w_from_zero(omega: np.ndarray, ell: int, c: float) -> np.ndarray:
    out = np.empty(omega.shape, complex)
    small = np.abs(omega) * c <= _SERIES_SWITCH
    if np.any(small):
        out[small] = _w_series(omega[small], ell, c)
    if np.any(~small):
        ob = omega[~small]
        out[~small] = _w_full_line(ob, ell) - _w_tail(ob, ell, c)
    return out


def _window_adaptive(beta: float, ell: int, lo: float, hi: float) -> complex:
    w = 2 * np.pi * beta
    f = (lambda u: np.log(u) ** ell) if ell else (lambda u: np.ones_like(u))
    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    if w == 0:
        re = integrate.quad(f, lo, hi, **opts)[0]
        return complex(re, 0.0)
    head = 0j
    if lo == 0.0 and ell:
        # QAWO samples the endpoints; take the log singularity at 0 with QAGS
        # over less than one period first.
        a = min(hi, 1.0 / (1.0 + abs(w)))
        head = complex(integrate.quad(lambda u: f(u) * math.cos(w * u), 0.0, a, **opts)[0],
                       -integrate.quad(lambda u: f(u) * math.sin(w * u), 0.0, a, **opts)[0])
        lo = a
        if lo >= hi:
            return head
    re = integrate.quad(f, lo, hi, weight="cos", wvar=w, **opts)[0]
    im = -integrate.quad(f, lo, hi, weight="sin", wvar=w, **opts)[0]
    return head + complex(re, im)


def window_transform(beta, ell: int, lo: float, hi: float, method: str = "analytic"):
    """int_lo^hi (log u)^ell e(-beta u) du, vectorized over beta.

    method "analytic": for |omega c| <= 8 a Taylor series in omega with exact
    log-moments; beyond, the Gamma-function value of the integral over
    (0, inf) minus the contour-rotated tail from c.  method "adaptive": QAWO
    quadrature, for validation.
    """
    if ell not in (0, 1, 2):
        raise PreconditionError("ell must be 0, 1 or 2")
    if not 0 <= lo < hi:
        raise PreconditionError("need 0 <= lo < hi")
    b = np.asarray(beta, dtype=float)
    if method == "adaptive":
        out = np.vectorize(lambda bb: _window_adaptive(float(bb), ell, lo, hi), otypes=[complex])(b)
        return out[()] if out.ndim == 0 else out
    if method != "analytic":
        raise PreconditionError(f"unknown method {method!r}")
    flat = b.ravel()
    omega = 2 * np.pi * flat
    out = _w_from_zero(omega, ell, hi)
    if lo > 0:
        out = out - _w_from_zero(omega, ell, lo)
    out = out.reshape(b.shape)
    return out[()] if out.ndim == 0 else out


def _window_range(kind: str, x: float | None, X: float | None) -> tuple[float, float]:
    if kind == "J":
        return 0.0, 3.0
    if kind == "K":
        return 0.0, 1.0
    if kind == "I":
        if x is None or X is None:
            raise PreconditionError("kind I needs x and X")
        if not 1 < X <= 3 * x:
            raise PreconditionError("kind I needs 1 < X <= 3x")
        return X / (2 * x), X / x
    raise PreconditionError(f"unknown kind {kind!r}")


def _window_envelope(beta: np.ndarray, ell: int, lo: float, hi: float) -> np.ndarray:
    """Upper bound for |window_transform| at beta >= 1."""
    w = 2 * np.pi * beta
    Lr = np.log(w)
    full = {0: 1.0, 1: EULER_GAMMA + np.abs(Lr) + np.pi / 2}.get(ell)
    if full is None:
        full = (EULER_GAMMA + np.abs(Lr) + np.pi / 2) ** 2 + np.pi**2 / 6
    env = np.zeros_like(beta)
    for c in (lo, hi):
        if c == 0:
            continue
        A = abs(math.log(c)) + np.pi / 2
        t = 1.0 / (c * w)
        tail = {0: 1.0, 1: A + t, 2: A * A + 2 * A * t + 2 * t * t}[ell]
        env += tail / w
    n_full = 0 if lo > 0 else 1
    return env + n_full * full / w


def _fresnel_envelope(beta: np.ndarray) -> np.ndarray:
    return np.minimum(1.0, 1 / (2 * np.sqrt(2 * beta)) + 1 / (2 * np.pi * beta))


def _tail_bound(B: float, ell: int, lo: float, hi: float) -> float:
    f = lambda b: float(_window_envelope(np.array([b]), ell, lo, hi)[0] * _fresnel_envelope(np.array([b]))[0] ** 3)
    val = integrate.quad(f, B, np.inf, limit=200)[0]
    return 2.0 * val


def choose_cutoff(ell: int, lo: float, hi: float, tol: float = TAIL_TOL) -> tuple[float, float]:
    """Smallest B = 32 * 2^j whose envelope tail bound is at most tol."""
    B = 32.0
    while True:
        t = _tail_bound(B, ell, lo, hi)
        if t <= tol or B > 2**22:
            return B, t
        B *= 2


def _panel_integral(ell: int, lo: float, hi: float, B: float, width: float,
                    nodes: np.ndarray, weights: np.ndarray) -> float:
    edges = np.arange(0.0, B + width / 2, width)
    total = 0.0
    chunk = 2048
    for i in range(0, len(edges) - 1, chunk):
        a = edges[i : i + chunk + 1]
        mid = 0.5 * (a[1:] + a[:-1])
        half = 0.5 * (a[1:] - a[:-1])
        beta = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        vals = window_transform(beta, ell, lo, hi) * fresnel_unit(beta) ** 3
        vals = vals.real.reshape(len(mid), len(nodes))
        total += math.fsum((vals @ weights) * half)
    return 2.0 * total


def singular_integral(kind: str, ell: int, x: float | None = None, X: float | None = None,
                      panel_width: float = 0.5) -> OscIntegralResult:
    """J_l, K_l or I_l(X) by truncated beta quadrature.

    The integrand at -beta is the conjugate of the one at beta, so the value
    is twice the real part of the integral over [0, B].  Composite
    Gauss-Legendre panels (20 nodes) are compared with a 14-node rule on the
    same panels for the residual; the envelope tail bound is added.
    """
    if ell not in (0, 1, 2):
        raise PreconditionError("ell must be 0, 1 or 2")
    lo, hi = _window_range(kind, x, X)
    B, tail = choose_cutoff(ell, lo, hi)
    v20 = _panel_integral(ell, lo, hi, B, panel_width, _GL_X, _GL_W)
    v14 = _panel_integral(ell, lo, hi, B, panel_width, _GL2_X, _GL2_W)
    err = tail + abs(v20 - v14)
    if err > ERR_LIMIT:
        raise NonConvergenceError(f"{kind}_{ell}: error estimate {err:.3g} exceeds {ERR_LIMIT}")
    n_nodes = int(round(B / panel_width)) * (len(_GL_X) + len(_GL2_X))
    return OscIntegralResult(v20, err, "beta-quadrature", B, n_nodes, kind, ell)


def _radial_antiderivative(ell: int, r: float) -> float:
    """int_0^r (log rho^2)^ell rho^2 d rho."""
    if r <= 0:
        return 0.0
    r3 = r**3
    lr = math.log(r)
    if ell == 0:
        return r3 / 3
    if ell == 1:
        return 2 * (r3 * lr / 3 - r3 / 9)
    return 4 * (r3 * lr * lr / 3 - 2 * r3 * lr / 9 + 2 * r3 / 27)


def geometric_oracle(kind: str, ell: int, x: float | None = None, X: float | None = None,
                     tol: float = 1e-11) -> float:
    """int over [0,1]^3 of (log|v|^2)^ell restricted to |v|^2 in the window range.

    Spherical coordinates about the origin, with directions parametrized by
    the face v1 = 1 of the cube: by symmetry the cube is six copies of the
    cone over 0 <= t <= s <= 1, the ray (1, s, t) leaves the cube at radius
    sqrt(1 + s^2 + t^2), and the solid-angle element is
    ds dt / (1 + s^2 + t^2)^{3/2}.  The radial integral is exact; the
    two-dimensional direction integral is adaptive with breakpoints on the
    circles where a window radius meets the cube boundary.
    """
    if ell not in (0, 1, 2):
        raise PreconditionError("ell must be 0, 1 or 2")
    lo, hi = _window_range(kind, x, X)
    ra, rb = math.sqrt(lo), math.sqrt(hi)
    kinks = [k - 1 for k in (lo, hi) if 1 < k < 3]

    def radial(s, t):
        w = 1 + s * s + t * t
        rmax = math.sqrt(w)
        val = _radial_antiderivative(ell, min(rb, rmax)) - _radial_antiderivative(ell, min(ra, rmax))
        return val / w**1.5

    def inner(s):
        pts = [math.sqrt(k - s * s) for k in kinks if 0 < k - s * s < s * s]
        return integrate.quad(lambda t: radial(s, t), 0.0, s, points=pts or None,
                              epsabs=tol, epsrel=tol, limit=200)[0]

    spts = sorted({math.sqrt(v) for k in kinks for v in (k, k / 2) if 0 < v < 1})
    val = integrate.quad(inner, 0.0, 1.0, points=spts or None, epsabs=tol, epsrel=tol, limit=200)[0]
    return 6.0 * val
