"""Weights and Muckenhoupt-type constants over finite ball families."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Ball, BallFamily, Grid, GridFn, _nonempty_span
from .operators import ALL_INTERVALS, maximal_values
from .rng import SplitMix64

FLOOR_FACTOR = 1e-12


@dataclass(frozen=True, eq=False)
class Weight:
    """Positive weight, clamped below at ``floor`` (default ``1e-12 * max``)."""

    w: GridFn
    floor: float

    @classmethod
    def from_values(cls, grid: Grid, values, floor: float | None = None) -> "Weight":
        v = np.abs(np.asarray(values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("weight has non-finite samples")
        top = float(np.max(v))
        if top <= 0:
            raise ValueError("weight vanishes identically")
        fl = FLOOR_FACTOR * top if floor is None else float(floor)
        return cls(GridFn(grid, np.maximum(v, fl)), fl)

    @property
    def grid(self) -> Grid:
        return self.w.grid

    @property
    def values(self) -> np.ndarray:
        return self.w.values

    def power(self, e: float) -> "Weight":
        return Weight.from_values(self.grid, self.values ** e)


@dataclass(frozen=True)
class WeightFamilySpec:
    """``power(a)``, ``product_of_powers``, ``perturbed_power`` or ``constant``."""

    kind: str
    a: float = 0.0
    exponents: tuple[float, ...] = ()
    points: tuple[float, ...] = ()
    amplitude: float = 0.0
    frequency: float = 1.0
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "product_of_powers", "perturbed_power", "constant"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("power", "perturbed_power") and not self.a > -1:
            raise ValueError("power weight exponent must exceed -1")
        if self.kind == "product_of_powers":
            if len(self.exponents) != len(self.points) or not self.exponents:
                raise ValueError("product_of_powers needs matching exponents and points")
            if any(e <= -1 for e in self.exponents):
                raise ValueError("power weight exponent must exceed -1")
        if self.kind == "perturbed_power" and not 0 <= self.amplitude < 1:
            raise ValueError("perturbation amplitude must lie in [0, 1)")

    def build(self, grid: Grid, seed: int = 0) -> Weight:
        x = grid.x
        # |x| floored at h/2 so a sample sitting on the singularity stays finite
        ax = np.maximum(np.abs(x), grid.h / 2)
        if self.kind == "constant":
            return Weight.from_values(grid, np.full(grid.n, float(self.value)))
        if self.kind == "power":
            return Weight.from_values(grid, ax ** self.a)
        if self.kind == "product_of_powers":
            v = np.ones(grid.n)
            for e, p in zip(self.exponents, self.points):
                v = v * np.maximum(np.abs(x - p), grid.h / 2) ** e
            return Weight.from_values(grid, v)
        phase = 2 * math.pi * SplitMix64(seed).uniform()
        v = ax ** self.a * (1 + self.amplitude * np.sin(self.frequency * x + phase))
        return Weight.from_values(grid, v)


def _spans(grid: Grid, family) -> list[tuple[int, int]]:
    return [s for s in family.spans(grid) if s[1] > s[0]]


def _mean(v, lo, hi):
    return float(np.mean(v[lo:hi]))


def a1_constant(w: Weight, family=ALL_INTERVALS) -> float:
    """``max_x M_F w(x) / w(x)`` over samples covered by the family."""
    Mw = maximal_values(w.values, w.grid, family)
    covered = Mw > 0
    if not np.any(covered):
        return 0.0
    return float(np.max(Mw[covered] / w.values[covered]))


def ap_ball_values(w: Weight, p: float, family: BallFamily) -> np.ndarray:
    if not p > 1:
        raise ValueError("p must exceed 1")
    sigma = w.values ** (-1.0 / (p - 1))
    return np.array([_mean(w.values, lo, hi) * _mean(sigma, lo, hi) ** (p - 1)
                     for lo, hi in _spans(w.grid, family)])


def ap_constant(w: Weight, p: float, family: BallFamily) -> float:
    """``max_B mean_B(w) * mean_B(w^(-1/(p-1)))^(p-1)``."""
    return float(np.max(ap_ball_values(w, p, family)))


def _check_vector(weights, p_vec):
    if len(weights) != len(p_vec) or not weights:
        raise ValueError("weights and exponents must have the same nonzero length")
    if any(p <= 1 for p in p_vec):
        raise ValueError("every p_i must exceed 1")
    grid = weights[0].grid
    if any(v.grid != grid for v in weights):
        raise ValueError("weights live on different grids")
    return grid


def ap_vec_ball_values(weights: Sequence[Weight], p_vec: Sequence[float],
                       family: BallFamily) -> np.ndarray:
    grid = _check_vector(weights, p_vec)
    p = 1.0 / sum(1.0 / pi for pi in p_vec)
    prod_w = np.prod([v.values for v in weights], axis=0)
    wp = prod_w ** p
    duals = [(v.values ** (-pi / (pi - 1)), pi / (pi - 1)) for v, pi in zip(weights, p_vec)]
    out = []
    for lo, hi in _spans(grid, family):
        val = _mean(wp, lo, hi) ** (1.0 / p)
        for d, pc in duals:
            val *= _mean(d, lo, hi) ** (1.0 / pc)
        out.append(val)
    return np.array(out)


def ap_vec_constant(weights: Sequence[Weight], p_vec: Sequence[float], family: BallFamily) -> float:
    """Multilinear ``A_p`` constant with ``w = prod w_i`` and ``1/p = sum 1/p_i``."""
    return float(np.max(ap_vec_ball_values(weights, p_vec, family)))


def a_infty_vec_ball_values(weights: Sequence[Weight], family: BallFamily) -> np.ndarray:
    grid = weights[0].grid
    prod_w = np.prod([v.values for v in weights], axis=0)
    logs = [-np.log(v.values) for v in weights]
    out = []
    for lo, hi in _spans(grid, family):
        val = _mean(prod_w, lo, hi)
        for lg in logs:
            val *= math.exp(_mean(lg, lo, hi))
        out.append(val)
    return np.array(out)


def a_infty_vec_constant(weights: Sequence[Weight], family: BallFamily) -> float:
    """``max_B mean_B(w) * prod_i exp(mean_B log(1/w_i))`` (exp-log limit of ``A_p``)."""
    return float(np.max(a_infty_vec_ball_values(weights, family)))


def m_r_weight(w: Weight, r: float, family=ALL_INTERVALS) -> GridFn:
    """``M_r w = (M(w^r))^(1/r)`` restricted to the family."""
    if not r >= 1:
        raise ValueError("r must be at least 1")
    m = maximal_values(w.values ** r, w.grid, family)
    return GridFn(w.grid, m ** (1.0 / r) if r != 1 else m)


def ess_inf(f: GridFn, ball: Ball) -> float:
    lo, hi = _nonempty_span(f.grid, ball)
    return float(np.min(f.values[lo:hi]))


def ess_sup(f: GridFn, ball: Ball) -> float:
    lo, hi = _nonempty_span(f.grid, ball)
    return float(np.max(f.values[lo:hi]))
