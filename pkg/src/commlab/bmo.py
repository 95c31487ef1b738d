"""BMO and BMO_b^q norms, John–Nirenberg ratios and dyadic average drift."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fits import AffineFit, affine_fit, best_constant, lq_value
from .grid import Ball, BallFamily, Grid, GridFn, average


def _spans(grid: Grid, family: BallFamily):
    return [(B, lo, hi) for B, (lo, hi) in zip(family, family.spans(grid)) if hi > lo]


def mean_oscillation(v: np.ndarray) -> float:
    return float(np.mean(np.abs(v - np.mean(v))))


def bmo_ball_values(b: GridFn, family: BallFamily) -> np.ndarray:
    return np.array([mean_oscillation(b.values[lo:hi]) for _, lo, hi in _spans(b.grid, family)])


def bmo_norm(b: GridFn, family: BallFamily) -> float:
    """``max_B mean_B |b - b_B|``."""
    return float(np.max(bmo_ball_values(b, family)))


@dataclass(frozen=True)
class BallFit:
    ball: Ball
    fit: AffineFit

    @property
    def flagged(self) -> bool:
        return not self.fit.converged


def bmo_b_q_fits(f: GridFn, b: GridFn, q: float, family: BallFamily) -> list[BallFit]:
    if not q > 0:
        raise ValueError("q must be positive")
    if f.grid != b.grid:
        raise ValueError("f and b live on different grids")
    return [BallFit(B, affine_fit(f.values[lo:hi], b.values[lo:hi], q))
            for B, lo, hi in _spans(f.grid, family)]


def bmo_b_q_norm(f: GridFn, b: GridFn, q: float, family: BallFamily) -> tuple[float, BallFit]:
    """``sup_B inf_{c0,c1} (mean_B |f - c0 + c1 b|^q)^(1/q)`` and the worst ball's fit.

    For ``q < 1`` the returned fits carry ``nonconvex=True``; on large balls the
    value is the best local vertex found and therefore an upper bound.
    """
    fits = bmo_b_q_fits(f, b, q, family)
    worst = max(fits, key=lambda bf: bf.fit.value)
    return worst.fit.value, worst


def q_oscillation(f: GridFn, ball: Ball, q: float) -> float:
    """``inf_c (mean_B |f - c|^q)^(1/q)``: the ``c1 = 0`` feasible point of BMO_b^q."""
    lo, hi = f.grid.span(ball)
    return best_constant(f.values[lo:hi], q)[1]


def jn_ratio(b: GridFn, ball: Ball, alpha: float, bmo: float) -> float:
    lo, hi = b.grid.span(ball)
    v = b.values[lo:hi]
    return lq_value(v - np.mean(v), alpha) / (max(alpha, 1.0) * bmo)


def jn_check(b: GridFn, alpha: float, family: BallFamily) -> float:
    """``max_B (mean_B |b - b_B|^alpha)^(1/alpha) / (max(alpha, 1) ||b||_BMO)``.

    Returns 0 when ``b`` is constant on every ball.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    bmo = bmo_norm(b, family)
    if bmo == 0:
        return 0.0
    return max(jn_ratio(b, B, alpha, bmo) for B, _, _ in _spans(b.grid, family))


@dataclass(frozen=True)
class DriftRow:
    j: int
    drift: float
    normalized: float


def dyadic_drift_check(b: GridFn, ball: Ball, j_max: int,
                       family: BallFamily | None = None) -> tuple[list[DriftRow], bool]:
    """``|b_{2^j B} - b_B| / (j ||b||_BMO)`` for ``j = 0..j_max``.

    The BMO norm is taken over ``family`` (default: the dilates ``2^j B``
    themselves).  Returns the rows and whether the range was truncated because
    a dilate left the domain.
    """
    grid = b.grid
    js = [j for j in range(j_max + 1) if grid.contains(ball.dilate(2.0 ** j))]
    truncated = len(js) < j_max + 1
    js = list(range(len(js)))  # dilates are nested, so the valid range is a prefix
    if not js:
        return [], True
    if family is None:
        family = BallFamily(tuple(ball.dilate(2.0 ** j) for j in js))
    bmo = bmo_norm(b, family)
    base = average(b, ball)
    rows = []
    for j in js:
        d = abs(average(b, ball.dilate(2.0 ** j)) - base)
        norm = 0.0 if j == 0 or bmo == 0 else d / (j * bmo)
        rows.append(DriftRow(j, d, norm))
    return rows, truncated
