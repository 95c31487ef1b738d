"""Oscillation functionals for commutators and the per-term proof decompositions.

Conventions: ``c_B`` is the grid sample nearest the ball center (point
evaluation, no interpolation); ``b_2B`` is the plain average of ``b`` on
``2B``; infinite dyadic sums stop at the last ``j`` whose ``2^(j+1) B`` is
still inside the domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bmo import bmo_norm, mean_oscillation
from .fits import affine_fit, best_constant, lq_value
from .grid import Ball, BallFamily, Grid, GridFn, average
from .kernels import DEFAULT_TRUNCATION, BilinearKernelSpec, KernelSpec, TruncationRule
from .operators import (ALL_INTERVALS, _spread_max, apply_rows, bilinear_rows, commutator,
                        vector_inside, vector_outside)
from .weights import Weight, a_infty_vec_constant, m_r_weight

RHS_FLOOR = 1e-300
DEGENERATE = 1e-14

DIFFERENCE_TRUNCATION = "difference_truncation"
VECTOR_OUTSIDE_TRUNCATION = "vector_outside_truncation"


@dataclass(frozen=True)
class Term:
    value: float
    bound: float
    ratio: float


def _ratio(lhs: float, rhs: float) -> float:
    return lhs / max(rhs, RHS_FLOOR)


def make_term(value: float, bound: float) -> Term:
    return Term(float(value), float(bound), _ratio(value, bound))


@dataclass(frozen=True)
class OscReport:
    ball: Ball
    lhs: float
    rhs: float | None = None
    ratio: float | None = None
    minimizers: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    flags: tuple = ()
    extra: dict = field(default_factory=dict)

    def with_rhs(self, rhs: float) -> "OscReport":
        flags = self.flags
        if rhs < DEGENERATE * max(abs(self.lhs), 1.0) and self.lhs > 0:
            flags = flags + ("degenerate",)
        return replace(self, rhs=float(rhs), ratio=_ratio(self.lhs, rhs), flags=flags)


def classical_osc(g: GridFn, ball: Ball) -> float:
    """``mean_B |g - g_B|``."""
    lo, hi = g.grid.span(ball)
    return mean_oscillation(g.values[lo:hi])


def _rows(grid: Grid, ball: Ball) -> tuple[np.ndarray, int, int]:
    lo, hi = grid.span(ball)
    if hi <= lo:
        raise ValueError("empty ball")
    return np.arange(lo, hi), grid.nearest(ball.center), lo


def dyadic_depth(grid: Grid, ball: Ball) -> int:
    """Largest ``J`` with ``2^(J+1) B`` inside the domain (0 if none)."""
    J = 0
    while grid.contains(ball.dilate(2.0 ** (J + 2))):
        J += 1
    return J


# ------------------------------------------------------------------ linear

def _outside_at(K, grid, values, ball, rows, trunc):
    """``T(v chi_{(2B)^c})`` at ``rows``."""
    return apply_rows(K, grid, vector_outside(values, grid, ball), rows, trunc)


def modified_osc_fixed_c2(b: GridFn, K: KernelSpec, f: GridFn, ball: Ball, delta: float = 0.5,
                          trunc: TruncationRule = DEFAULT_TRUNCATION, comm=None) -> OscReport:
    """``inf_c1 (mean_B |[b,T]f - c1 - T(f chi_{(2B)^c})(c_B) b|^delta)^(1/delta)``.

    ``comm`` may carry a precomputed full-grid commutator.
    """
    grid = f.grid
    rows, ci, lo = _rows(grid, ball)
    if comm is None:
        cv = commutator(b, K, f, trunc, at=rows)
    else:
        cv = np.asarray(comm.values if isinstance(comm, GridFn) else comm)[rows]
    c2 = float(_outside_at(K, grid, f.values, ball, [ci], trunc)[0])
    c1, val = best_constant(cv - c2 * b.values[rows], delta)
    return OscReport(ball, val, minimizers={"c1": c1, "c2": c2, "c2_fixed": True})


def double_inf_osc(b: GridFn, K: KernelSpec, f: GridFn, ball: Ball, delta: float = 0.5,
                   trunc: TruncationRule = DEFAULT_TRUNCATION, comm=None) -> OscReport:
    """``inf_{c1,c2} (mean_B |[b,T]f - c1 - c2 b|^delta)^(1/delta)``."""
    grid = f.grid
    rows, ci, lo = _rows(grid, ball)
    fixed = modified_osc_fixed_c2(b, K, f, ball, delta, trunc, comm)
    if comm is None:
        cv = commutator(b, K, f, trunc, at=rows)
    else:
        cv = np.asarray(comm.values if isinstance(comm, GridFn) else comm)[rows]
    return _double_inf(cv, b.values[rows], ball, delta,
                       [(fixed.minimizers["c1"], -fixed.minimizers["c2"])])


def _double_inf(cv, bv, ball, delta, starts=()) -> OscReport:
    fit = affine_fit(cv, bv, delta, starts=starts)
    flags = ("nonconvex",) if fit.nonconvex else ()
    if not fit.converged:
        flags += ("not_converged",)
    # residual g - c0 + c1 b  <=>  g - c1' - c2' b with c1' = c0, c2' = -c1
    return OscReport(ball, fit.value, minimizers={"c1": fit.c0, "c2": -fit.c1}, flags=flags)


def sup_ratio(f: GridFn, w: Weight) -> float:
    """``||f / w||_inf``."""
    return float(np.max(np.abs(f.values) / w.values))


def rhs_linear(f: GridFn, w: Weight, b: GridFn, ball: Ball, r: float, family: BallFamily,
               maximal_family=ALL_INTERVALS, bmo: float | None = None, mrw: GridFn | None = None) -> float:
    """``r' ||f/w||_inf ||b||_BMO inf_{z in B} M_r w(z)``.

    ``bmo`` and ``mrw`` accept precomputed ``||b||_BMO`` and ``M_r w``.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    nb = bmo_norm(b, family) if bmo is None else bmo
    if mrw is None:
        mrw = m_r_weight(w, r, maximal_family)
    lo, hi = f.grid.span(ball)
    return (r / (r - 1)) * sup_ratio(f, w) * nb * float(np.min(mrw.values[lo:hi]))


def proof_decomposition_linear(b: GridFn, K: KernelSpec, f: GridFn, ball: Ball, delta: float,
                               eps: float, r: float, w: Weight, family: BallFamily,
                               trunc: TruncationRule = DEFAULT_TRUNCATION,
                               maximal_family=ALL_INTERVALS, bmo: float | None = None,
                               mw: GridFn | None = None, mrw: GridFn | None = None) -> OscReport:
    """Terms ``L11, L12, L21, L22`` of the linear oscillation estimate, each with its bound.

    ``lhs`` is the oscillation at the constants the argument exhibits,
    ``c1 = -b_2B T f2(c_B) - T((b - b_2B) f2)(c_B)`` and ``c2 = T f2(c_B)``.
    """
    if not 0 < delta < eps < 1:
        raise ValueError("need 0 < delta < eps < 1")
    grid = f.grid
    rows, ci, lo = _rows(grid, ball)
    big = ball.dilate(2.0)
    lam = average(b, big)
    bl = b.values - lam
    f1 = vector_inside(f.values, grid, ball)
    f2 = vector_outside(f.values, grid, ball)
    at = np.append(rows, ci)

    def T(v):
        out = apply_rows(K, grid, v, at, trunc)
        return out[:-1], float(out[-1])

    Tf1, _ = T(f1)
    Tf2, Tf2c = T(f2)
    Tbf1, _ = T(bl * f1)
    Tbf2, Tbf2c = T(bl * f2)
    bB = b.values[rows]
    blB = bl[rows]

    c2 = Tf2c
    c1 = -lam * Tf2c - Tbf2c
    comm = bB * (Tf1 + Tf2) - apply_rows(K, grid, b.values * f.values, rows, trunc)
    lhs = lq_value(comm - c1 - c2 * bB, delta)

    L11 = lq_value(blB * Tf1, delta)
    L12 = lq_value(blB * Tf2 + lam * Tf2c - c2 * bB, delta)
    L21 = lq_value(Tbf1, delta)
    L22 = lq_value(Tbf2 - Tbf2c, delta)

    nb = bmo_norm(b, family) if bmo is None else bmo
    if mw is None:
        mw = m_r_weight(w, 1.0, maximal_family)
    if mrw is None:
        mrw = m_r_weight(w, r, maximal_family)
    lo_, hi_ = grid.span(ball)
    inf_mw = float(np.min(mw.values[lo_:hi_]))
    inf_mrw = float(np.min(mrw.values[lo_:hi_]))
    fw = sup_ratio(f, w)
    J = dyadic_depth(grid, ball)
    omega_sum = K.omega.dyadic_sum(J)
    rc = r / (r - 1)

    # Hölder step for L11 with exponents eps/delta and its conjugate
    s = delta * eps / (eps - delta)
    holder = lq_value(blB, s) * lq_value(Tf1, eps)

    terms = {
        "L11": make_term(L11, nb * fw * inf_mw),
        "L12": make_term(L12, omega_sum * nb * fw * inf_mw),
        "L21": make_term(L21, rc * fw * nb * inf_mrw),
        "L22": make_term(L22, rc * fw * nb * inf_mrw),
    }
    flags = ("truncated_sum",)
    rep = OscReport(ball, lhs, minimizers={"c1": c1, "c2": c2, "lambda": lam}, terms=terms,
                    flags=flags, extra={"j_max": J, "omega_sum": omega_sum, "L11_holder": holder})
    return rep.with_rhs(rhs_linear(f, w, b, ball, r, family, maximal_family, nb, mrw))


# ------------------------------------------------------------------ sharp maximal check

@dataclass(frozen=True)
class SharpProfile:
    """Pointwise ``M_#,delta([b,T]f)``, ``g`` and ``M_T f`` on the whole grid."""

    lhs: np.ndarray
    g: np.ndarray
    mt: np.ndarray
    bmo: float

    def ratio(self, i: int) -> float:
        return _ratio(float(self.lhs[i]), float(self.g[i] + self.mt[i] * self.bmo))


def sharp_profile(b: GridFn, K: KernelSpec, f: GridFn, delta: float, family: BallFamily,
                  trunc: TruncationRule = DEFAULT_TRUNCATION, bmo_family=None) -> SharpProfile:
    grid = f.grid
    comm = commutator(b, K, f, trunc).values
    spans = family.spans(grid)
    sharp = np.zeros(len(spans))
    gval = np.zeros(len(spans))
    mt = np.zeros(len(spans))
    for k, (B, (lo, hi)) in enumerate(zip(family, spans)):
        if hi <= lo:
            continue
        if not grid.contains(B.dilate(2.0)):
            raise ValueError(f"ball {B} violates require_2B_inside")
        rows = np.arange(lo, hi)
        ci = grid.nearest(B.center)
        out = _outside_at(K, grid, f.values, B, np.append(rows, ci), trunc)
        cv = comm[lo:hi]
        sharp[k] = best_constant(cv, delta)[1]
        gval[k] = best_constant(cv - out[-1] * b.values[lo:hi], delta)[1]
        mt[k] = np.max(np.abs(out[:-1]))
    nb = bmo_norm(b, family if bmo_family is None else bmo_family)
    return SharpProfile(_spread_max(grid.n, spans, sharp), _spread_max(grid.n, spans, gval),
                        _spread_max(grid.n, spans, mt), nb)


def sharp_pointwise_check(b: GridFn, K: KernelSpec, f: GridFn, x: int, delta: float,
                          family: BallFamily, trunc: TruncationRule = DEFAULT_TRUNCATION):
    """``(lhs, g(x), M_T f(x), lhs / (g + M_T f ||b||_BMO))`` at sample index ``x``."""
    prof = sharp_profile(b, K, f, delta, family, trunc)
    return float(prof.lhs[x]), float(prof.g[x]), float(prof.mt[x]), prof.ratio(x)


# ------------------------------------------------------------------ multilinear

def _bilinear_pieces(K2, grid, fv, gv, ball, rows, mode, trunc):
    """``T(f, g)`` and the truncated ``T_B(f, g)`` at ``rows``."""
    full = bilinear_rows(K2, grid, fv, gv, rows, trunc)
    if mode == DIFFERENCE_TRUNCATION:
        inner = bilinear_rows(K2, grid, vector_inside(fv, grid, ball),
                              vector_inside(gv, grid, ball), rows, trunc)
        return full, full - inner
    if mode == VECTOR_OUTSIDE_TRUNCATION:
        return full, bilinear_rows(K2, grid, vector_outside(fv, grid, ball),
                                   vector_outside(gv, grid, ball), rows, trunc)
    raise ValueError(f"unknown truncation mode {mode!r}")


def rhs_multilinear(b: GridFn, fs, ws, ball: Ball, family: BallFamily, bmo=None) -> float:
    """``||b||_BMO prod_i ||f_i w_i||_inf ess inf_B 1/w`` with ``w = prod w_i``."""
    nb = bmo_norm(b, family) if bmo is None else bmo
    prod = 1.0
    for f, w in zip(fs, ws):
        prod *= float(np.max(np.abs(f.values * w.values)))
    wprod = np.prod([w.values for w in ws], axis=0)
    lo, hi = b.grid.span(ball)
    return nb * prod * float(np.min(1.0 / wprod[lo:hi]))


def modified_osc_multilinear(b: GridFn, K2: BilinearKernelSpec, f: GridFn, g: GridFn, ball: Ball,
                             delta: float = 1 / 3, mode: str = DIFFERENCE_TRUNCATION,
                             trunc: TruncationRule = DEFAULT_TRUNCATION,
                             weights=None, family: BallFamily | None = None,
                             oracle: bool = True, bmo: float | None = None) -> OscReport:
    """Bilinear oscillation at the explicit constants ``c1(B)``, ``c2(B)``; terms ``I1, I2, I21, I22``.

    ``weights`` is ``(w1, w2)`` (default constant 1); ``family`` defaults to
    the single ball for the BMO norm.  With ``oracle`` the report also carries
    the two-parameter infimum as ``extra["double_inf"]``.
    """
    if not 0 < delta < 0.5:
        raise ValueError("need 0 < delta < 1/2 for m = 2")
    grid = f.grid
    rows, ci, lo = _rows(grid, ball)
    if not grid.contains(ball.dilate(2.0)):
        raise ValueError("2B must lie inside the domain")
    at = np.append(rows, ci)
    lam = average(b, ball.dilate(2.0))
    bl = b.values - lam
    fv, gv = f.values, g.values

    Tfg, TBfg = _bilinear_pieces(K2, grid, fv, gv, ball, at, mode, trunc)
    Tbfg, TBbfg = _bilinear_pieces(K2, grid, bl * fv, gv, ball, at, mode, trunc)
    T_b_raw = bilinear_rows(K2, grid, b.values * fv, gv, rows, trunc)
    I22_inner = bilinear_rows(K2, grid, vector_inside(bl * fv, grid, ball),
                              vector_inside(gv, grid, ball), rows, trunc)

    c2 = float(TBfg[-1])
    c1 = float(-lam * TBfg[-1] - TBbfg[-1])
    bB = b.values[rows]
    comm = bB * Tfg[:-1] - T_b_raw
    lhs = lq_value(comm - c1 - c2 * bB, delta)

    blB = bl[rows]
    I1 = lq_value(blB * Tfg[:-1] - blB * TBfg[-1], delta)
    I2 = lq_value(Tbfg[:-1] - TBbfg[-1], delta)
    I21 = lq_value(TBbfg[:-1] - TBbfg[-1], delta)
    I22 = lq_value(I22_inner, delta)

    fam = family if family is not None else BallFamily((ball,))
    if weights is None:
        one = Weight.from_values(grid, np.ones(grid.n))
        weights = (one, one)
    nb = bmo_norm(b, fam) if bmo is None else bmo
    rhs = rhs_multilinear(b, (f, g), weights, ball, fam, nb)
    ainf = a_infty_vec_constant(list(weights), fam)
    bound = ainf * rhs
    terms = {name: make_term(v, bound) for name, v in
             (("I1", I1), ("I2", I2), ("I21", I21), ("I22", I22))}
    extra = {"mode": mode, "a_infty": ainf}
    flags = ()
    if oracle:
        d = _double_inf(comm, bB, ball, delta, [(c1, -c2)])
        extra["double_inf"] = d.lhs
        flags = d.flags
    rep = OscReport(ball, lhs, minimizers={"c1": c1, "c2": c2, "lambda": lam}, terms=terms,
                    flags=flags, extra=extra)
    return rep.with_rhs(rhs)


def extrap_multi_hypothesis_osc(b: GridFn, K2: BilinearKernelSpec, f: GridFn, g: GridFn,
                                ball: Ball, delta: float = 1 / 3,
                                trunc: TruncationRule = DEFAULT_TRUNCATION) -> OscReport:
    """``inf_c1 (mean_B |[b,T]_1(f,g) - c1 - T_B(f,g)(y) b(y)|^delta)^(1/delta)``.

    Here ``T_B = T - T(. chi_2B)`` multiplies ``b`` as a function of ``y``,
    not as the point value at ``c_B`` used by :func:`modified_osc_multilinear`.
    """
    grid = f.grid
    rows, ci, lo = _rows(grid, ball)
    Tfg, TBfg = _bilinear_pieces(K2, grid, f.values, g.values, ball, rows,
                                 DIFFERENCE_TRUNCATION, trunc)
    bB = b.values[rows]
    comm = bB * Tfg - bilinear_rows(K2, grid, b.values * f.values, g.values, rows, trunc)
    c1, val = best_constant(comm - TBfg * bB, delta)
    return OscReport(ball, val, minimizers={"c1": c1}, extra={"mode": "function_of_y"})
