import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commlab.bmo import bmo_norm
from commlab.grid import Ball, BallFamily, Grid, GridFn, dyadic_family, restrict_outside
from commlab.kernels import hilbert, tensor_hilbert
from commlab.operators import bilinear_apply, bilinear_commutator, commutator, cz_apply
from commlab.oscillation import (DIFFERENCE_TRUNCATION, VECTOR_OUTSIDE_TRUNCATION, _double_inf,
                                 classical_osc, double_inf_osc, extrap_multi_hypothesis_osc,
                                 modified_osc_fixed_c2, modified_osc_multilinear,
                                 proof_decomposition_linear, rhs_linear, sharp_pointwise_check)
from commlab.weights import Weight, WeightFamilySpec

from oracles import dense_grid_1d, one_param_oracle, two_param_oracle

H = hilbert()


def log_abs(grid):
    return GridFn(grid, np.log(np.maximum(np.abs(grid.x), grid.h / 2)))


def indicator(grid, a, b):
    return grid.sample(lambda x: ((x >= a) & (x <= b)).astype(float))


def one(grid):
    return Weight.from_values(grid, np.ones(grid.n))


# ------------------------------------------------------------------ classical

def test_classical_osc():
    g = Grid(-1.0, 1.0, 1024)
    B = Ball(0.0, 0.5)
    assert classical_osc(GridFn(g, np.full(g.n, 3.0)), B) == 0.0
    sgn = g.sample(np.sign)
    assert classical_osc(sgn, B) == pytest.approx(1.0, abs=2 * g.h / 0.5)
    f = GridFn(g, np.random.default_rng(0).normal(size=g.n))
    # the mean absorbs the shift up to rounding
    assert classical_osc(f + 4.0, B) == pytest.approx(classical_osc(f, B), rel=1e-13)


# ------------------------------------------------------------------ fixed c2 and double inf

def test_fixed_c2_trivial_cases():
    g = Grid(-4.0, 4.0, 1024)
    f = indicator(g, 1.0, 2.0)
    B = Ball(0.1, 0.05)
    c = GridFn(g, np.full(g.n, 1.7))
    assert modified_osc_fixed_c2(c, H, f, B).lhs <= 1e-9
    assert double_inf_osc(c, H, f, B).lhs <= 1e-9
    zero = GridFn(g, np.zeros(g.n))
    assert modified_osc_fixed_c2(log_abs(g), H, zero, B).lhs == 0.0


def test_fixed_c2_matches_oracle():
    g = Grid(-4.0, 4.0, 2048)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(0.1, 0.05)
    rep = modified_osc_fixed_c2(b, H, f, B, 0.5)
    # rebuild the integrand independently
    lo, hi = g.span(B)
    comm = commutator(b, H, f).values[lo:hi]
    c2 = cz_apply(H, restrict_outside(f, B.dilate(2.0))).values[g.nearest(B.center)]
    v = comm - c2 * b.values[lo:hi]
    assert rep.minimizers["c2"] == pytest.approx(c2, rel=1e-12)
    assert rep.lhs == pytest.approx(one_param_oracle(v, 0.5), rel=1e-6, abs=1e-12)
    assert rep.lhs <= dense_grid_1d(v, 0.5) * (1 + 1e-12)
    rhs = rhs_linear(f, one(g), b, B, 2.0, BallFamily((B,)))
    assert np.isfinite(rep.lhs / rhs)


def test_double_inf_below_fixed():
    g = Grid(-4.0, 4.0, 1024)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    for B in (Ball(0.1, 0.05), Ball(-0.5, 0.3), Ball(0.0, 1.0)):
        for delta in (0.3, 0.5, 0.7):
            fixed = modified_osc_fixed_c2(b, H, f, B, delta)
            dbl = double_inf_osc(b, H, f, B, delta)
            assert dbl.lhs <= fixed.lhs + 1e-9
            assert "nonconvex" in dbl.flags


def test_double_inf_small_ball_matches_oracle():
    g = Grid(-4.0, 4.0, 1024)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(0.3, 0.1)
    lo, hi = g.span(B)
    comm = commutator(b, H, f).values[lo:hi]
    dbl = double_inf_osc(b, H, f, B, 0.5)
    assert dbl.lhs == pytest.approx(two_param_oracle(comm, b.values[lo:hi], 0.5), rel=1e-6, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_double_inf_exact_representability(c, lam, seed):
    rng = np.random.default_rng(seed)
    bv = rng.normal(size=24)
    g = c + lam * bv
    rep = _double_inf(g, bv, Ball(0.0, 1.0), 0.5)
    assert rep.lhs <= 1e-9 * (1 + abs(c) + abs(lam))


def test_b_shift_invariance():
    g = Grid(-4.0, 4.0, 1024)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(-0.2, 0.2)
    for op in (modified_osc_fixed_c2, double_inf_osc):
        base = op(b, H, f, B).lhs
        assert op(b + 3.25, H, f, B).lhs == pytest.approx(base, abs=1e-9)


def test_delta_monotone():
    g = Grid(-4.0, 4.0, 1024)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(0.4, 0.3)
    vals = [modified_osc_fixed_c2(b, H, f, B, d).lhs for d in (0.3, 0.5, 0.7)]
    assert vals[0] <= vals[1] * (1 + 1e-12) and vals[1] <= vals[2] * (1 + 1e-12)


# ------------------------------------------------------------------ rhs and decomposition

def test_rhs_linear_examples():
    g = Grid(-2.0, 2.0, 1024)
    w = one(g)
    f = GridFn(g, w.values)
    sgn = g.sample(np.sign)
    r_min = 0.25
    F = dyadic_family(g, [0.0], 2, r_min=r_min)
    B = Ball(0.0, r_min)
    rhs = rhs_linear(f, w, sgn, B, 2.0, F)
    assert rhs == pytest.approx(2.0, abs=4 * g.h / r_min)
    assert rhs == pytest.approx(2 * bmo_norm(sgn, F), rel=1e-12)
    assert rhs_linear(f * 2.0, w, sgn, B, 2.0, F) == 2 * rhs
    assert rhs_linear(f, w, GridFn(g, np.full(g.n, 2.0)), B, 2.0, F) == 0.0
    with pytest.raises(ValueError):
        rhs_linear(f, w, sgn, B, 1.0, F)


def decomposition(b, f, B, **kw):
    g = f.grid
    F = BallFamily((B,))
    return proof_decomposition_linear(b, H, f, B, 0.5, 0.75, 2.0, one(g), F, **kw)


def test_decomposition_trivial_terms():
    g = Grid(-4.0, 4.0, 512)
    B = Ball(0.0, 0.5)
    inside = indicator(g, -0.5, 0.5)
    outside = indicator(g, 1.5, 2.5)
    b = log_abs(g)
    rep = decomposition(b, inside, B)
    assert rep.terms["L12"].value == 0.0 and rep.terms["L22"].value == 0.0
    rep = decomposition(b, outside, B)
    assert rep.terms["L11"].value == 0.0 and rep.terms["L21"].value == 0.0
    const = decomposition(GridFn(g, np.full(g.n, 2.0)), indicator(g, -1.0, 2.0), B)
    assert all(t.value <= 1e-9 for t in const.terms.values())
    assert "truncated_sum" in rep.flags
    assert rep.extra["j_max"] >= 1


def test_decomposition_triangle_inequality():
    # lhs^delta <= sum of the four terms^delta (the delta-triangle inequality)
    g = Grid(-4.0, 4.0, 1024)
    b, f = log_abs(g), indicator(g, 0.2, 2.0)
    for B in (Ball(0.1, 0.05), Ball(0.3, 0.3)):
        rep = decomposition(b, f, B)
        total = sum(t.value ** 0.5 for t in rep.terms.values())
        assert rep.lhs ** 0.5 <= total * (1 + 1e-9)
        # the explicit constants give an upper bound on the double infimum
        assert double_inf_osc(b, H, f, B).lhs <= rep.lhs + 1e-9
        assert np.isfinite(rep.ratio)


def test_decomposition_validates_exponents():
    g = Grid(-4.0, 4.0, 256)
    with pytest.raises(ValueError):
        proof_decomposition_linear(log_abs(g), H, indicator(g, 1, 2), Ball(0, 0.5), 0.5, 0.4, 2.0,
                                   one(g), BallFamily((Ball(0, 0.5),)))


# ------------------------------------------------------------------ sharp check

def test_sharp_trivial():
    g = Grid(-4.0, 4.0, 512)
    F = dyadic_family(g, 9, 3, r_min=0.1)
    f = indicator(g, 1.0, 2.0)
    i = g.nearest(0.0)
    lhs, gv, mt, ratio = sharp_pointwise_check(GridFn(g, np.full(g.n, 1.5)), H, f, i, 0.5, F)
    # the commutator of a constant vanishes only to rounding, so both sides are noise
    assert lhs <= 1e-12 and gv <= 1e-12 and mt > 0
    zero = GridFn(g, np.zeros(g.n))
    assert sharp_pointwise_check(log_abs(g), H, zero, i, 0.5, F) == (0.0, 0.0, 0.0, 0.0)


# ------------------------------------------------------------------ multilinear

T2 = tensor_hilbert()


def test_multilinear_trivial():
    g = Grid(-4.0, 4.0, 256)
    f = indicator(g, 1.0, 2.0)
    B = Ball(0.5, 0.25)
    c = GridFn(g, np.full(g.n, -0.7))
    assert modified_osc_multilinear(c, T2, f, f, B).lhs <= 1e-9
    zero = GridFn(g, np.zeros(g.n))
    for mode in (DIFFERENCE_TRUNCATION, VECTOR_OUTSIDE_TRUNCATION):
        assert modified_osc_multilinear(log_abs(g), T2, zero, f, B, mode=mode).lhs == 0.0
        assert modified_osc_multilinear(log_abs(g), T2, f, zero, B, mode=mode).lhs == 0.0
    with pytest.raises(ValueError):
        modified_osc_multilinear(log_abs(g), T2, f, f, B, delta=0.5)
    with pytest.raises(ValueError):
        modified_osc_multilinear(log_abs(g), T2, f, f, B, mode="nope")


@pytest.mark.parametrize("mode", [DIFFERENCE_TRUNCATION, VECTOR_OUTSIDE_TRUNCATION])
def test_multilinear_explicit_above_oracle(mode):
    g = Grid(-4.0, 4.0, 512)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(0.5, 0.25)
    rep = modified_osc_multilinear(b, T2, f, f, B, 1 / 3, mode=mode)
    lo, hi = g.span(B)
    comm = bilinear_commutator(b, T2, f, f).values[lo:hi]
    oracle = two_param_oracle(comm, b.values[lo:hi], 1 / 3)
    assert rep.lhs >= oracle - 1e-6
    assert rep.extra["double_inf"] == pytest.approx(oracle, rel=1e-6, abs=1e-12)
    assert all(t.value >= 0 for t in rep.terms.values())
    assert np.isfinite(rep.ratio)


def test_multilinear_modes_agree_for_separated_supports():
    # with f and g both vanishing on 2B the two truncations coincide
    g = Grid(-4.0, 4.0, 256)
    b, f = log_abs(g), indicator(g, 1.5, 2.5)
    u = indicator(g, -2.5, -1.5)
    B = Ball(0.0, 0.5)
    a = modified_osc_multilinear(b, T2, f, u, B, mode=DIFFERENCE_TRUNCATION, oracle=False)
    c = modified_osc_multilinear(b, T2, f, u, B, mode=VECTOR_OUTSIDE_TRUNCATION, oracle=False)
    assert a.lhs == pytest.approx(c.lhs, rel=1e-9, abs=1e-12)


def test_multilinear_rhs_uses_weights():
    g = Grid(-4.0, 4.0, 256)
    b, f = log_abs(g), indicator(g, 1.0, 2.0)
    B = Ball(0.5, 0.25)
    base = modified_osc_multilinear(b, T2, f, f, B, oracle=False)
    w = WeightFamilySpec("constant", value=2.0).build(g)
    scaled = modified_osc_multilinear(b, T2, f, f, B, weights=(w, w), oracle=False)
    # prod ||f w||_inf gains 4, ess inf 1/(w1 w2) loses 4
    assert scaled.rhs == pytest.approx(base.rhs, rel=1e-12)
    assert scaled.lhs == base.lhs


def test_extrap_variant():
    g = Grid(-4.0, 4.0, 256)
    f = indicator(g, 1.0, 2.0)
    B = Ball(0.5, 0.25)
    c = GridFn(g, np.full(g.n, 2.0))
    # T_B(f, f)(y) b varies with y, so a constant b does not make this vanish
    assert extrap_multi_hypothesis_osc(c, T2, f, f, B).lhs > 1e-3
    rep = extrap_multi_hypothesis_osc(log_abs(g), T2, f, f, B)
    assert rep.extra["mode"] == "function_of_y"
    assert np.isfinite(rep.lhs) and rep.lhs >= 0
    lo, hi = g.span(B)
    b = log_abs(g)
    lo2, hi2 = g.span(B.dilate(2.0))
    fin = np.zeros(g.n)
    fin[lo2:hi2] = f.values[lo2:hi2]
    fin = GridFn(g, fin)
    TB = bilinear_apply(T2, f, f).values - bilinear_apply(T2, fin, fin).values
    comm = bilinear_commutator(b, T2, f, f).values
    v = (comm - TB * b.values)[lo:hi]
    assert rep.lhs == pytest.approx(one_param_oracle(v, 1 / 3), rel=1e-6, abs=1e-12)
