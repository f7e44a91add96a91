import math

import numpy as np
import pytest
from scipy import integrate

from tau3ternary.arith import sieve_divisor_tables
from tau3ternary.errors import (
    NotInvertibleError,
    PreconditionError,
    RegimeError,
    UnsupportedOrderError,
)
from tau3ternary.voronoi import (
    ASYMPTOTIC_COEFFS,
    MellinConfig,
    asymptotic_envelope,
    default_dual_cutoff,
    make_bump,
    mellin_moments,
    phi_asymptotic,
    phi_contour,
    phi_pm,
    ramp_derivative_constant,
    voronoi_check,
)

PI3 = math.pi**3


@pytest.fixture(scope="module")
def w8():
    return make_bump(2000.0, 8.0)


def test_window_shape(w8):
    assert w8(0.4 * w8.X) == 0 and w8(1.01 * w8.X) == 0
    assert w8(0.75 * w8.X) == 1
    u = np.linspace(0, 1.2 * w8.X, 10001)
    v = w8(u)
    assert np.all((v >= 0) & (v <= 1))
    lo, hi = w8.plateau
    assert np.all(v[(u >= lo) & (u <= hi)] == 1)
    assert np.all(v[(u <= w8.X / 2) | (u >= w8.X)] == 0)


def test_derivative_bound():
    M = 8.0
    w = make_bump(1.0, M)
    y = np.linspace(0.45, 1.05, 10**4)
    d1 = np.max(np.abs(np.gradient(w.profile(y), y)))
    c = d1 / M
    assert c <= 4
    assert ramp_derivative_constant() >= c * 0.99


def test_make_bump_errors():
    with pytest.raises(PreconditionError):
        make_bump(100.0, 4.0)
    with pytest.raises(PreconditionError):
        make_bump(-1.0, 8.0)


def test_mellin_moments(w8):
    m0, m1, m2 = mellin_moments(w8)
    # The ramp is antisymmetric about its midpoint, so each edge loses X/(2M).
    assert m0.real == pytest.approx(w8.X * (0.5 - 1 / w8.M), rel=1e-11)
    w = make_bump(1000.0, 8.0)
    assert 1000 / 2 - 2 * 1000 / 8 < mellin_moments(w)[0].real < 1000 / 2
    ref1 = integrate.quad(lambda u: w8(u) * math.log(u), 1000, 2000, limit=200, epsabs=1e-12)[0]
    ref2 = integrate.quad(lambda u: w8(u) * math.log(u) ** 2, 1000, 2000, limit=200, epsabs=1e-12)[0]
    assert m1.real == pytest.approx(ref1, rel=1e-10)
    assert m2.real == pytest.approx(ref2, rel=1e-10)


def test_mellin_moment_decay(w8):
    for beta in (0.01, 0.1, 1.0, 3.3):
        m0 = mellin_moments(w8, beta)[0]
        assert abs(m0) <= 2.0 * w8.X / (1 + abs(beta) * w8.X) * w8.M


def test_mellin_config():
    w = make_bump(2000.0, 8.0)
    r = MellinConfig().resolve(w, 0)
    assert r.T == 4000.0 and r.nodes > 0
    with pytest.raises(PreconditionError):
        MellinConfig(sigma=-1.0).resolve(w, 0)
    assert MellinConfig(sigma=-1.5).resolve(w, 1).sigma == -1.5


@pytest.mark.parametrize("k", [0, 1])
def test_contour_shift_invariance(w8, k):
    ys = np.array([1e-4, 3e-3, 0.05, 0.7])
    base = phi_contour(ys, k, w8, MellinConfig(sigma=-0.5))
    for sig in (-0.2, 0.1):
        other = phi_contour(ys, k, w8, MellinConfig(sigma=sig))
        assert np.max(np.abs(other - base) / np.abs(base)) <= 1e-6


@pytest.mark.parametrize("k", [0, 1])
def test_shifted_and_unshifted_forms(w8, k):
    ys = np.array([2e-4, 0.01, 0.2, 1.0, 3.0])
    a = phi_contour(ys, k, w8, form="shifted")
    b = phi_contour(ys, k, w8, form="unshifted")
    assert np.max(np.abs(a - b) / np.abs(a)) <= 1e-9


def test_phi_pm_fused(w8):
    ys = np.array([1e-3, 0.05, 0.4, 2.0])
    p0 = phi_contour(ys, 0, w8)
    p1 = phi_contour(ys, 1, w8)
    for sign in (1, -1):
        sep = p0 + sign * p1 / (1j * PI3 * ys)
        fused = phi_pm(ys, sign, w8)
        assert np.max(np.abs(fused - sep)) <= 1e-9 * np.max(np.abs(sep))


@pytest.mark.parametrize("k", [0, 1])
def test_small_argument_bound(w8, k):
    ys = np.logspace(-6, -2, 9)
    v = np.abs(phi_contour(ys, k, w8))
    assert np.all(v <= 3.0 * (PI3 * ys) ** k * w8.X**0.1)


def test_asymptotic_coefficients():
    c = 2 * math.sqrt(3 * math.pi) / (6 * math.pi)
    a0, b0 = ASYMPTOTIC_COEFFS[0]
    a1, b1 = ASYMPTOTIC_COEFFS[1]
    assert a0 == pytest.approx(-c / 1j) and b0 == pytest.approx(c / 1j)
    assert a1 == pytest.approx(-c) and b1 == pytest.approx(-c)


def test_asymptotic_errors(w8):
    with pytest.raises(RegimeError):
        phi_asymptotic(0.01, 0, w8)
    with pytest.raises(UnsupportedOrderError):
        phi_asymptotic(10.0, 0, w8, terms=2)
    extra = {(0, 2): (0.0, 0.0)}
    assert phi_asymptotic(10.0, 0, w8, terms=2, coefficients=extra) == phi_asymptotic(10.0, 0, w8)


@pytest.mark.parametrize("k,yX", [(0, 1e5), (0, 1e6), (1, 1e5)])
def test_contour_vs_asymptotic_points(k, yX):
    # Error measured on the scale of the leading term, as in the acceptance run.
    w = make_bump(2000.0, 256.0)
    y = yX / w.X
    pc = phi_contour(y, k, w)
    pa = phi_asymptotic(y, k, w)
    assert abs(pc - pa) <= 1e-3 * asymptotic_envelope(y, k, w)


def test_default_cutoff(w8):
    assert default_dual_cutoff(1, w8) == 3
    assert default_dual_cutoff(3, w8) == 56
    assert default_dual_cutoff(4, w8) == 132


@pytest.fixture(scope="module")
def small_tables():
    return sieve_divisor_tables(2000)


@pytest.mark.parametrize("q,a", [(1, 1), (3, 1), (4, 3)])
def test_voronoi_examples(w8, small_tables, q, a):
    r = voronoi_check(q, a, w8, tables=small_tables)
    assert r["residual"] <= 1e-2
    # The halved main term leaves half of the left side unexplained.
    assert r["residual_halved"] == pytest.approx(0.5, abs=0.01)


def test_voronoi_doubling_q1(w8, small_tables):
    r1 = voronoi_check(1, 1, w8, 3, small_tables)
    r2 = voronoi_check(1, 1, w8, 6, small_tables)
    assert r2["residual"] < r1["residual"]


def test_voronoi_errors(w8, small_tables):
    with pytest.raises(NotInvertibleError):
        voronoi_check(4, 2, w8, tables=small_tables)
    with pytest.raises(PreconditionError):
        voronoi_check(3, 1, w8, tables=small_tables, normalization="other")
