import math

import numpy as np
import pytest

from tau3ternary.arith import sieve_divisor_tables
from tau3ternary.errors import PreconditionError, TablesTooSmallError
from tau3ternary.special import singular_series_values
from tau3ternary.theorem import (
    brute_lhs,
    c5_stabilize,
    compare,
    compare_sweep,
    main_coefficients,
    predict_main_terms,
    required_limit,
)


def loop_box(table, x):
    B = math.isqrt(int(x))
    return sum(int(table[a * a + b * b + c * c]) for a in range(1, B + 1)
               for b in range(1, B + 1) for c in range(1, B + 1))


def loop_ball(table, x):
    R = math.isqrt(int(x))
    return sum(int(table[a * a + b * b + c * c]) for a in range(-R, R + 1)
               for b in range(-R, R + 1) for c in range(-R, R + 1)
               if 1 <= a * a + b * b + c * c <= x)


def test_box_examples(tables):
    assert brute_lhs("tau3-box", 1, tables) == 3
    assert brute_lhs("tau3-box", 4, tables) == 66


def test_box_and_ball_vs_loops(tables):
    for x in (2, 9, 50, 130):
        assert brute_lhs("tau3-box", x, tables) == loop_box(tables.tau3, x)
        assert brute_lhs("tau-box", x, tables) == loop_box(tables.tau, x)
        assert brute_lhs("identity-1.5-left", x, tables) == loop_ball(tables.tau3, x)
        assert brute_lhs("tau3-ball", x, tables) == loop_ball(tables.tau3, x)


@pytest.mark.parametrize("x", [100, 1000, 10000])
def test_lattice_identity(tables, x):
    assert brute_lhs("identity-1.5-left", x, tables) == brute_lhs("identity-1.5-right", x, tables)


def test_box_monotone_and_table_invariant(tables):
    vals = [brute_lhs("tau3-box", x, tables) for x in range(1, 200)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    small = sieve_divisor_tables(required_limit("tau3-box", 199))
    assert brute_lhs("tau3-box", 199, small) == vals[-1]


def test_lhs_errors(tables):
    small = sieve_divisor_tables(10)
    with pytest.raises(TablesTooSmallError):
        brute_lhs("tau3-box", 4, small)
    with pytest.raises(PreconditionError):
        brute_lhs("nope", 4, tables)
    with pytest.raises(PreconditionError):
        brute_lhs("tau3-box", 0.5, tables)


def test_coefficients_structure():
    C0, C1, C2 = singular_series_values(256)
    A, B, C = main_coefficients("tau3-box")
    Ap, Bp, Cp = main_coefficients("tau3-box", normalization="halved")
    assert (Ap, Bp, Cp) == (A / 2, B / 2, C / 2)
    # J0 = 1, so the halved leading coefficient is C0/4.
    assert Ap == pytest.approx(C0 / 4, rel=1e-5)
    Ao = main_coefficients("tau3-box", integrals="oracle")
    assert np.allclose((A, B, C), Ao, rtol=1e-5)


def test_ball_leading_at_e():
    C0 = singular_series_values(256)[0]
    t1, _, _ = predict_main_terms("tau3-ball", math.e, quad_cfg={"normalization": "halved"})
    assert t1 == pytest.approx(2 * C0 * (math.pi / 6) * math.e**1.5, rel=1e-5)


def test_prediction_determinism():
    a = predict_main_terms("tau3-box", 12345.0)
    b = predict_main_terms("tau3-box", 12345.0)
    assert a == b
    with pytest.raises(PreconditionError):
        predict_main_terms("tau3-box", 10.0, Q=32)
    with pytest.raises(PreconditionError):
        main_coefficients("tau-box")


def test_compare_at_one(tables):
    r = compare("tau3-box", 1.0, tables)
    assert r.t1 == 0 and r.t2 == 0
    assert r.predicted == r.t1 + r.t2 + r.t3
    assert r.ratio == r.lhs / r.t3
    sweep = compare_sweep("tau3-box", [1.0], tables)
    assert len(sweep["reports"]) == 1 and math.isnan(sweep["fitted_exponent"])


def test_sweep_trend(tables):
    s = compare_sweep("tau3-box", [1e3, 1e4, 65536.0], tables)
    r = [rep.ratio for rep in s["reports"]]
    assert 0.4 <= r[2] <= 1.6
    assert abs(r[2] - 1) < abs(r[1] - 1)
    with pytest.raises(PreconditionError):
        compare_sweep("tau3-box", [10.0, 5.0], tables)


def test_ball_ratio(tables):
    assert compare("tau3-ball", 1e5, tables).ratio == pytest.approx(1.0, abs=0.05)


def test_c5_synthetic():
    L = 4 * 1.2020569031595942854 / (5 * 1.0369277551433699263)
    xs = [1e4, 1e5, 1e6]
    lhs = [L * x**1.5 * math.log(x) + 0.3 * x**1.5 for x in xs]
    s = c5_stabilize(xs, lhs_values=lhs)
    assert s["leading_constant"] == pytest.approx(0.927398, abs=1e-6)
    assert all(abs(d) < 1e-12 for d in s["successive_deltas"])
    assert s["estimate"] == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(PreconditionError):
        c5_stabilize([1.0, 2.0])


def test_c5_brute(tables):
    s = c5_stabilize([1e3, 1e4, 1e5], tables)
    assert s["strictly_shrinking"]
