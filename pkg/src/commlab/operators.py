"""Discretized maximal operators, CZ operators, commutators and grand maximal operators.

Every operator is the plain O(n^2) quadrature ``h * sum_j K(x_i, y_j) f(y_j)``
over untruncated pairs.  Functions that accept ``at`` evaluate only the listed
sample indices and return a bare array; otherwise they return a ``GridFn``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .fits import best_constant
from .grid import Ball, BallFamily, Grid, GridFn, REQUIRE_2B_INSIDE
from .kernels import DEFAULT_TRUNCATION, BilinearKernelSpec, KernelSpec, TruncationRule

ALL_INTERVALS = "all_intervals"
_BLOCK = 1 << 21


# ------------------------------------------------------------------ maximal

def _ball_means(v: np.ndarray, spans) -> np.ndarray:
    out = np.empty(len(spans))
    for k, (lo, hi) in enumerate(spans):
        out[k] = np.mean(v[lo:hi]) if hi > lo else 0.0
    return out


def _spread_max(n: int, spans, per_ball: np.ndarray) -> np.ndarray:
    """``out[x] = max over balls containing x of per_ball``, zero if uncovered."""
    out = np.zeros(n)
    for (lo, hi), m in zip(spans, per_ball):
        if hi > lo:
            np.maximum(out[lo:hi], m, out=out[lo:hi])
    return out


def _all_intervals_max(a: np.ndarray) -> np.ndarray:
    """Uncentered maximal over every grid-aligned interval (brute force)."""
    n = a.size
    S = np.concatenate([[0.0], np.cumsum(a)])
    out = np.zeros(n)
    for i in range(n):
        # means of [i, j] for j >= i, then suffix maxima over j >= x
        means = (S[i + 1:] - S[i]) / np.arange(1, n - i + 1)
        suffix = np.maximum.accumulate(means[::-1])[::-1]
        np.maximum(out[i:], suffix, out=out[i:])
    return out


def maximal_values(values: np.ndarray, grid: Grid, family=ALL_INTERVALS) -> np.ndarray:
    a = np.abs(np.asarray(values, dtype=float))
    if family is None or family == ALL_INTERVALS:
        return _all_intervals_max(a)
    spans = family.spans(grid)
    return _spread_max(grid.n, spans, _ball_means(a, spans))


def maximal(f: GridFn, family=ALL_INTERVALS) -> GridFn:
    """Uncentered maximal function over the balls of ``family`` (or all intervals)."""
    return GridFn(f.grid, maximal_values(f.values, f.grid, family))


def maximal_power(f: GridFn, s: float, family=ALL_INTERVALS) -> GridFn:
    """``M(|f|^s)^(1/s)``."""
    if not s > 0:
        raise ValueError("s must be positive")
    if s == 1:
        return maximal(f, family)
    m = maximal_values(np.abs(f.values) ** s, f.grid, family)
    return GridFn(f.grid, m ** (1.0 / s))


def multilinear_maximal(fs: Sequence[GridFn], family=ALL_INTERVALS) -> GridFn:
    """``sup_{B containing x} prod_i mean_B |f_i|``."""
    grid = fs[0].grid
    if family is None or family == ALL_INTERVALS:
        n = grid.n
        sums = [np.concatenate([[0.0], np.cumsum(np.abs(f.values))]) for f in fs]
        out = np.zeros(n)
        for i in range(n):
            cnt = np.arange(1, n - i + 1)
            prod = np.ones(n - i)
            for S in sums:
                prod *= (S[i + 1:] - S[i]) / cnt
            suffix = np.maximum.accumulate(prod[::-1])[::-1]
            np.maximum(out[i:], suffix, out=out[i:])
        return GridFn(grid, out)
    spans = family.spans(grid)
    prod = np.ones(len(spans))
    for f in fs:
        prod *= _ball_means(np.abs(f.values), spans)
    return GridFn(grid, _spread_max(grid.n, spans, prod))


def sharp_maximal(f: GridFn, delta: float, family: BallFamily) -> GridFn:
    """``sup_{B containing x} inf_c (mean_B |f - c|^delta)^(1/delta)``."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    spans = family.spans(f.grid)
    per_ball = np.array([best_constant(f.values[lo:hi], delta)[1] if hi > lo else 0.0
                         for lo, hi in spans])
    return GridFn(f.grid, _spread_max(f.grid.n, spans, per_ball))


# ------------------------------------------------------------------ CZ operators

def apply_rows(K: KernelSpec, grid: Grid, values: np.ndarray, rows,
               trunc: TruncationRule = DEFAULT_TRUNCATION) -> np.ndarray:
    """``h sum_j K(x_i, y_j) v_j`` for ``i`` in ``rows``."""
    rows = np.asarray(rows, dtype=int)
    v = np.asarray(values, dtype=float)
    cols = np.flatnonzero(v)
    out = np.zeros(rows.size)
    if cols.size == 0 or rows.size == 0:
        return out
    vc = v[cols]
    step = max(1, _BLOCK // cols.size)
    for start in range(0, rows.size, step):
        r = rows[start:start + step]
        out[start:start + step] = K.offsets_matrix(grid, r, cols, trunc) @ vc
    return grid.h * out


def cz_apply(K: KernelSpec, f: GridFn, trunc: TruncationRule = DEFAULT_TRUNCATION, at=None):
    """Truncated singular integral ``T_eps f``."""
    if at is not None:
        return apply_rows(K, f.grid, f.values, at, trunc)
    return GridFn(f.grid, apply_rows(K, f.grid, f.values, np.arange(f.grid.n), trunc))


def dyadic_epsilons(grid: Grid) -> list[float]:
    eps, out = grid.h, []
    while eps < grid.length:
        out.append(eps)
        eps *= 2
    return out


def cz_maximal_truncation(K: KernelSpec, f: GridFn, eps_set=None) -> GridFn:
    """``max_{eps in eps_set} |T_eps f|`` (dyadic from ``h`` by default)."""
    eps_set = dyadic_epsilons(f.grid) if eps_set is None else list(eps_set)
    if not eps_set:
        raise ValueError("eps_set must be nonempty")
    out = np.zeros(f.grid.n)
    for eps in eps_set:
        np.maximum(out, np.abs(cz_apply(K, f, TruncationRule(eps)).values), out=out)
    return GridFn(f.grid, out)


def _same_grid(*fs):
    g = fs[0].grid
    if any(f.grid != g for f in fs[1:]):
        raise ValueError("grid functions live on different grids")
    return g


def commutator(b: GridFn, K: KernelSpec, f: GridFn,
               trunc: TruncationRule = DEFAULT_TRUNCATION, at=None):
    """``[b, T] f = b T f - T(b f)`` with the same truncation in both terms."""
    grid = _same_grid(b, f)
    rows = np.arange(grid.n) if at is None else np.asarray(at, dtype=int)
    Tf = apply_rows(K, grid, f.values, rows, trunc)
    Tbf = apply_rows(K, grid, b.values * f.values, rows, trunc)
    out = b.values[rows] * Tf - Tbf
    return GridFn(grid, out) if at is None else out


def _check_margins(grid: Grid, family: BallFamily):
    for B in family:
        if not grid.contains(B.dilate(2.0)):
            raise ValueError(f"ball {B} violates {REQUIRE_2B_INSIDE}")


def outside_part(K: KernelSpec, values: np.ndarray, grid: Grid, ball: Ball, rows,
                 trunc: TruncationRule = DEFAULT_TRUNCATION) -> np.ndarray:
    """``T(v chi_{(2B)^c})`` at ``rows``."""
    lo, hi = grid.span(ball.dilate(2.0))
    v = np.array(values, dtype=float)
    v[lo:hi] = 0.0
    return apply_rows(K, grid, v, rows, trunc)


def grand_maximal(K: KernelSpec, f: GridFn, family: BallFamily,
                  trunc: TruncationRule = DEFAULT_TRUNCATION) -> GridFn:
    """``sup_{B containing x} max_{z in B} |T(f chi_{(2B)^c})(z)|``."""
    grid = f.grid
    _check_margins(grid, family)
    spans = family.spans(grid)
    per_ball = np.zeros(len(spans))
    for k, (B, (lo, hi)) in enumerate(zip(family, spans)):
        if hi > lo:
            vals = outside_part(K, f.values, grid, B, np.arange(lo, hi), trunc)
            per_ball[k] = np.max(np.abs(vals))
    return GridFn(grid, _spread_max(grid.n, spans, per_ball))


# ------------------------------------------------------------------ bilinear

def bilinear_rows(K2: BilinearKernelSpec, grid: Grid, fv: np.ndarray, gv: np.ndarray, rows,
                  trunc: TruncationRule = DEFAULT_TRUNCATION) -> np.ndarray:
    """``h^2 sum_{y1,y2} K(x, y1, y2) f(y1) g(y2)`` at ``rows``, each ``y_i`` truncated."""
    rows = np.asarray(rows, dtype=int)
    if K2.factors is not None:
        k1, k2 = K2.factors
        return apply_rows(k1, grid, fv, rows, trunc) * apply_rows(k2, grid, gv, rows, trunc)
    cut = trunc.offset_cutoff(grid)
    cf = np.flatnonzero(fv)
    cg = np.flatnonzero(gv)
    out = np.zeros(rows.size)
    x = grid.x
    for k, i in enumerate(rows):
        j1 = cf[np.abs(i - cf) > cut]
        j2 = cg[np.abs(i - cg) > cut]
        if j1.size == 0 or j2.size == 0:
            continue
        Kx = K2.eval(x[i], x[j1][:, None], x[j2][None, :])
        out[k] = fv[j1] @ Kx @ gv[j2]
    return grid.h ** 2 * out


def bilinear_apply(K2: BilinearKernelSpec, f: GridFn, g: GridFn,
                   trunc: TruncationRule = DEFAULT_TRUNCATION, at=None):
    grid = _same_grid(f, g)
    rows = np.arange(grid.n) if at is None else at
    out = bilinear_rows(K2, grid, f.values, g.values, rows, trunc)
    return GridFn(grid, out) if at is None else out


def bilinear_commutator(b: GridFn, K2: BilinearKernelSpec, f: GridFn, g: GridFn,
                        trunc: TruncationRule = DEFAULT_TRUNCATION, at=None):
    """``[b, T]_1 (f, g) = b T(f, g) - T(b f, g)``."""
    grid = _same_grid(b, f, g)
    rows = np.arange(grid.n) if at is None else np.asarray(at, dtype=int)
    Tfg = bilinear_rows(K2, grid, f.values, g.values, rows, trunc)
    Tbfg = bilinear_rows(K2, grid, b.values * f.values, g.values, rows, trunc)
    out = b.values[rows] * Tfg - Tbfg
    return GridFn(grid, out) if at is None else out


def vector_outside(values: np.ndarray, grid: Grid, ball: Ball) -> np.ndarray:
    lo, hi = grid.span(ball.dilate(2.0))
    v = np.array(values, dtype=float)
    v[lo:hi] = 0.0
    return v


def vector_inside(values: np.ndarray, grid: Grid, ball: Ball) -> np.ndarray:
    lo, hi = grid.span(ball.dilate(2.0))
    v = np.zeros_like(values, dtype=float)
    v[lo:hi] = values[lo:hi]
    return v


def bilinear_grand_maximal(K2: BilinearKernelSpec, f: GridFn, g: GridFn, family: BallFamily,
                           trunc: TruncationRule = DEFAULT_TRUNCATION) -> GridFn:
    """``sup_{B containing x} max_{z in B} |T(f chi_{(2B)^c}, g chi_{(2B)^c})(z)|``."""
    grid = _same_grid(f, g)
    _check_margins(grid, family)
    spans = family.spans(grid)
    per_ball = np.zeros(len(spans))
    for k, (B, (lo, hi)) in enumerate(zip(family, spans)):
        if hi > lo:
            vals = bilinear_rows(K2, grid, vector_outside(f.values, grid, B),
                                 vector_outside(g.values, grid, B), np.arange(lo, hi), trunc)
            per_ball[k] = np.max(np.abs(vals))
    return GridFn(grid, _spread_max(grid.n, spans, per_ball))
