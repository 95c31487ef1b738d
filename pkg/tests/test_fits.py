import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commlab.fits import affine_fit, best_constant, lq_value

from oracles import dense_grid_1d, objective, one_param_oracle, two_param_oracle


@pytest.mark.parametrize("q", [1 / 3, 0.5, 1.0, 2.0, 3.0])
def test_best_constant_matches_oracle(q):
    rng = np.random.default_rng(3)
    for _ in range(10):
        v = rng.standard_t(2, size=rng.integers(5, 60))
        c, val = best_constant(v, q)
        want = one_param_oracle(v, q)
        assert val == pytest.approx(want, rel=1e-6)
        assert objective(v - c, q) == pytest.approx(val, rel=1e-12)
        # a dense scan can only do worse
        assert dense_grid_1d(v, q, 801) >= val * (1 - 1e-12)


def test_best_constant_closed_forms():
    v = np.array([4.0, -1.0, 2.5, 10.0, 0.0])
    assert best_constant(v, 2.0)[0] == pytest.approx(v.mean())
    assert best_constant(v, 1.0)[0] == 2.5
    assert best_constant(np.full(7, 3.0), 0.5) == (3.0, 0.0)


@pytest.mark.parametrize("q", [1 / 3, 0.5, 1.0, 2.0])
def test_affine_fit_matches_oracle(q):
    rng = np.random.default_rng(11)
    for _ in range(8):
        n = int(rng.integers(4, 40))
        b = rng.normal(size=n)
        g = 0.7 - 1.3 * b + rng.standard_t(3, size=n)
        fit = affine_fit(g, b, q)
        assert fit.value == pytest.approx(two_param_oracle(g, b, q), rel=1e-6)
        # at a vertex two residuals vanish exactly; recomputing them leaves
        # rounding noise of size eps, which the power q < 1 inflates to eps^q
        noise = (1e-15 * np.max(np.abs(g))) ** min(q, 1.0)
        assert objective(fit.residual(g, b), q) == pytest.approx(fit.value, rel=1e-10, abs=noise)
        assert fit.nonconvex == (q < 1)


@pytest.mark.parametrize("q", [0.5, 1.0])
def test_local_search_path(q):
    # exact_limit=0 forces the multi-start vertex descent for q < 1
    rng = np.random.default_rng(5)
    for _ in range(6):
        b = rng.uniform(-2, 2, size=30)
        g = np.sin(3 * b) + 0.1 * rng.normal(size=30)
        fit = affine_fit(g, b, q, exact_limit=0)
        oracle = two_param_oracle(g, b, q)
        assert fit.value >= oracle * (1 - 1e-12)
        if q == 1:
            assert fit.value == pytest.approx(oracle, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 50), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1),
       st.sampled_from([1 / 3, 0.5, 1.0, 2.0]))
def test_exact_representability(n, alpha, beta, seed, q):
    b = np.random.default_rng(seed).normal(size=n)
    g = alpha * b + beta
    assert affine_fit(g, b, q).value <= 1e-9 * (1 + abs(alpha) + abs(beta))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 60), st.integers(0, 2**32 - 1), st.sampled_from([1 / 3, 0.5, 1.0, 2.0]))
def test_affine_fit_below_constant_fit(n, seed, q):
    rng = np.random.default_rng(seed)
    g, b = rng.normal(size=n), rng.normal(size=n)
    assert affine_fit(g, b, q).value <= best_constant(g, q)[1] * (1 + 1e-12) + 1e-15


def test_flat_symbol_falls_back():
    g = np.array([1.0, 2.0, 4.0, 8.0])
    fit = affine_fit(g, np.full(4, 2.0), 1.0)
    assert fit.c1 == 0.0
    assert fit.value == pytest.approx(best_constant(g, 1.0)[1])


def test_q2_normal_equations():
    rng = np.random.default_rng(2)
    b = rng.normal(size=50)
    g = rng.normal(size=50)
    A = np.c_[np.ones(50), b]
    coef = np.linalg.solve(A.T @ A, A.T @ g)
    fit = affine_fit(g, b, 2.0)
    assert fit.c0 == pytest.approx(coef[0], rel=1e-12, abs=1e-14)
    assert -fit.c1 == pytest.approx(coef[1], rel=1e-12, abs=1e-14)
    assert fit.value == pytest.approx(lq_value(g - A @ coef, 2.0), rel=1e-12)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        affine_fit(np.ones(3), np.ones(4), 1.0)
