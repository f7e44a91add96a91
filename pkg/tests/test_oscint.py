import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tau3ternary.errors import PreconditionError
from tau3ternary.oscint import (
    PSI0_BOUND_C,
    fresnel_unit,
    geometric_oracle,
    psi0,
    singular_integral,
    window_transform,
)


def fresnel_ref(beta):
    """int_0^1 e(beta v^2) dv at 30 digits."""
    with mpmath.workdps(30):
        f = lambda v: mpmath.expj(2 * mpmath.pi * beta * v * v)
        pts = np.linspace(0, 1, int(4 * abs(beta)) + 3).tolist()
        return complex(mpmath.quad(f, pts))


def test_fresnel_examples():
    assert fresnel_unit(0.0) == 1
    assert abs(fresnel_unit(1e4)) <= 0.01
    assert abs(fresnel_unit(1.0) - fresnel_ref(1.0)) < 1e-12


@pytest.mark.parametrize("beta", [-250.0, -30.0, -1.5, -1e-4, 1e-9, 5e-4, 1e-3, 0.2, 2.5, 29.9, 31.0, 777.7])
def test_fresnel_vs_reference(beta):
    assert abs(fresnel_unit(beta) - fresnel_ref(beta)) < 1e-10


def test_fresnel_vectorized_and_conjugate():
    b = np.linspace(-40, 40, 81)
    v = fresnel_unit(b)
    assert v.shape == b.shape
    assert np.allclose(v[::-1], np.conj(v), atol=1e-15)


def test_fresnel_continuity_at_thirty():
    # The function moves by about 2 delta |f'| across 30 +- delta; each side
    # must match the reference, so any method switch there is seamless.
    d = 1e-6
    lo, hi = fresnel_unit(30 - d), fresnel_unit(30 + d)
    assert abs(lo - fresnel_ref(30 - d)) < 1e-10
    assert abs(hi - fresnel_ref(30 + d)) < 1e-10
    # |f'(beta)| <= int_0^1 2 pi v^2 dv = 2 pi / 3
    assert abs(hi - lo) <= 2 * d * 2 * math.pi / 3


def test_psi0():
    assert psi0(0.0, 9.0) == pytest.approx(3.0)
    assert psi0(0.37, 1.0) == fresnel_unit(0.37)
    with mpmath.workdps(25):
        ref = complex(mpmath.quad(lambda u: mpmath.expj(2 * mpmath.pi * u * u), np.linspace(0, 2, 12).tolist()))
    assert abs(psi0(1.0, 4.0) - ref) < 1e-12
    assert abs(psi0(1.0, 4.0) - 2 * fresnel_unit(4.0)) < 1e-15
    with pytest.raises(PreconditionError):
        psi0(1.0, 0.0)


@given(st.floats(-1e4, 1e4), st.floats(0.01, 1e4))
def test_psi0_bound(beta, x):
    v = abs(psi0(beta, x))
    bound = math.sqrt(x) if beta == 0 else min(math.sqrt(x), PSI0_BOUND_C / math.sqrt(abs(beta)))
    assert v <= bound * (1 + 1e-12) + 1e-14


def test_window_examples():
    assert window_transform(0.0, 0, 0.0, 3.0) == pytest.approx(3.0, abs=1e-12)
    assert window_transform(0.0, 1, 0.0, 1.0) == pytest.approx(-1.0, abs=1e-12)
    assert abs(window_transform(1.0, 0, 0.0, 3.0)) < 1e-12


@pytest.mark.parametrize("ell", [0, 1, 2])
@pytest.mark.parametrize("lo,hi", [(0.0, 3.0), (0.0, 1.0), (0.5, 1.0), (0.25, 0.5)])
def test_window_analytic_vs_adaptive(ell, lo, hi):
    betas = np.linspace(-100, 100, 50)
    a = window_transform(betas, ell, lo, hi)
    b = window_transform(betas, ell, lo, hi, method="adaptive")
    assert np.max(np.abs(a - b)) <= 1e-9


def test_window_closed_form_ell0():
    betas = np.linspace(-100, 100, 50) + 0.013
    closed = (np.exp(-2j * np.pi * betas * 0.5) - np.exp(-2j * np.pi * betas * 1.0)) / (2j * np.pi * betas)
    assert np.max(np.abs(window_transform(betas, 0, 0.5, 1.0) - closed)) <= 1e-12


def test_window_errors():
    with pytest.raises(PreconditionError):
        window_transform(1.0, 3, 0, 1)
    with pytest.raises(PreconditionError):
        window_transform(1.0, 0, 1, 1)


def test_oracle_exact_values():
    assert geometric_oracle("J", 0) == pytest.approx(1.0, abs=1e-10)
    assert geometric_oracle("K", 0) == pytest.approx(math.pi / 6, abs=1e-10)
    # In the unit-ball octant, log|v|^2 integrates radially in closed form.
    assert geometric_oracle("K", 1) == pytest.approx(-math.pi / 9, abs=1e-10)
    assert geometric_oracle("K", 2) == pytest.approx(4 * math.pi / 27, abs=1e-10)
    shell = math.pi / 6 * (1 - 2**-1.5)
    assert geometric_oracle("I", 0, x=5.0, X=5.0) == pytest.approx(shell, abs=1e-10)


def test_oracle_J1_against_monte_carlo_free_cubature():
    # Tensor Gauss-Legendre on [0,1]^3 in a cube split at 1/2 around the
    # origin singularity: independent of the radial construction.
    x, w = np.polynomial.legendre.leggauss(24)
    total = 0.0
    edges = [0, 1 / 64, 1 / 16, 1 / 4, 1 / 2, 1]
    for a0, a1 in zip(edges, edges[1:]):
        for b0, b1 in zip(edges, edges[1:]):
            for c0, c1 in zip(edges, edges[1:]):
                pts = [0.5 * (h - l) * x + 0.5 * (h + l) for l, h in ((a0, a1), (b0, b1), (c0, c1))]
                ws = [0.5 * (h - l) * w for l, h in ((a0, a1), (b0, b1), (c0, c1))]
                X, Y, Z = np.meshgrid(*pts, indexing="ij")
                W = ws[0][:, None, None] * ws[1][None, :, None] * ws[2][None, None, :]
                total += float(np.sum(W * np.log(X * X + Y * Y + Z * Z)))
    assert geometric_oracle("J", 1) == pytest.approx(total, abs=1e-6)


@pytest.mark.parametrize("kind,ell", [("J", 0), ("J", 1), ("J", 2), ("K", 0), ("K", 1), ("K", 2)])
def test_quadrature_vs_oracle(kind, ell):
    r = singular_integral(kind, ell)
    assert r.err_estimate >= 0 and math.isfinite(r.value)
    assert r.method == "beta-quadrature" and r.node_count > 0
    assert abs(r.value - geometric_oracle(kind, ell)) <= max(1e-5, 3 * r.err_estimate)


@pytest.mark.parametrize("x,X,ell", [(10.0, 17.0, 0), (10.0, 17.0, 1), (4.0, 12.0, 0), (100.0, 30.0, 2)])
def test_quadrature_vs_oracle_I(x, X, ell):
    r = singular_integral("I", ell, x, X)
    assert abs(r.value - geometric_oracle("I", ell, x, X)) <= max(1e-5, 3 * r.err_estimate)


def test_examples_J0_K0():
    assert singular_integral("J", 0).value == pytest.approx(1.0, abs=1e-5)
    assert singular_integral("K", 0).value == pytest.approx(0.523599, abs=1e-5)


def test_dyadic_blocks_exhaust_cube():
    x = 2.0**45
    total = math.fsum(geometric_oracle("I", 0, x, 3 * x / 2 ** (j - 1)) for j in range(1, 41))
    assert total == pytest.approx(1.0, abs=1e-4)


def test_I_preconditions():
    with pytest.raises(PreconditionError):
        singular_integral("I", 0, 1.0, 5.0)
    with pytest.raises(PreconditionError):
        singular_integral("I", 0)
    with pytest.raises(PreconditionError):
        singular_integral("Z", 0)
