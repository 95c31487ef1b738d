"""Uniform 1D grids, sampled functions, balls (intervals) and ball families.

Samples sit at cell midpoints ``x_i = left + (i + 1/2) h``.  A sample belongs
to a ball ``(c, r)`` iff ``|x_i - c| < r`` (strict).  All averages use the
discrete measure of ``B ∩ domain`` (sample count times ``h``) so that
constants average to themselves exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

REQUIRE_2B_INSIDE = "require_2B_inside"
CLIP_TO_DOMAIN = "clip_to_domain"
MARGIN_RULES = (REQUIRE_2B_INSIDE, CLIP_TO_DOMAIN)


class EmptyBallError(ValueError):
    pass


class EmptyFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    left: float
    right: float
    n: int

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"grid needs left < right, got [{self.left}, {self.right}]")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs an integer n >= 8, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.right - self.left) / self.n

    @property
    def length(self) -> float:
        return self.right - self.left

    @cached_property
    def x(self) -> np.ndarray:
        x = self.left + (np.arange(self.n) + 0.5) * self.h
        x.setflags(write=False)
        return x

    def span(self, ball: "Ball") -> tuple[int, int]:
        """Half-open index range ``[lo, hi)`` of samples strictly inside ``ball``."""
        lo = int(np.searchsorted(self.x, ball.center - ball.radius, side="right"))
        hi = int(np.searchsorted(self.x, ball.center + ball.radius, side="left"))
        return lo, max(lo, hi)

    def mask(self, ball: "Ball") -> np.ndarray:
        lo, hi = self.span(ball)
        m = np.zeros(self.n, dtype=bool)
        m[lo:hi] = True
        return m

    def nearest(self, point: float) -> int:
        i = int(math.floor((point - self.left) / self.h))
        return min(max(i, 0), self.n - 1)

    def contains(self, ball: "Ball") -> bool:
        """True if the closed interval ``[c - r, c + r]`` lies in the domain."""
        return self.left <= ball.center - ball.radius and ball.center + ball.radius <= self.right

    def fn(self, values) -> "GridFn":
        return GridFn(self, values)

    def sample(self, func) -> "GridFn":
        return GridFn(self, func(self.x))

    def to_dict(self) -> dict:
        return {"left": self.left, "right": self.right, "n": self.n}


@dataclass(frozen=True, eq=False)
class GridFn:
    """A real function sampled on a grid.  Values are stored read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _other(self, other):
        if isinstance(other, GridFn):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFn(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFn(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFn(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFn(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFn(self.grid, self.values / self._other(other))

    def __neg__(self):
        return GridFn(self.grid, -self.values)

    def __abs__(self):
        return GridFn(self.grid, np.abs(self.values))

    def __pow__(self, p):
        return GridFn(self.grid, self.values ** p)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class Ball:
    center: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def side(self) -> float:
        return 2.0 * self.radius

    def dilate(self, factor: float) -> "Ball":
        return Ball(self.center, factor * self.radius)


@dataclass(frozen=True)
class BallFamily:
    balls: tuple[Ball, ...]
    margin_rule: str = REQUIRE_2B_INSIDE

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.balls:
            raise EmptyFamilyError("empty family")
        if self.margin_rule not in MARGIN_RULES:
            raise ValueError(f"unknown margin rule {self.margin_rule!r}")

    def __iter__(self) -> Iterator[Ball]:
        return iter(self.balls)

    def __len__(self) -> int:
        return len(self.balls)

    def spans(self, grid: Grid) -> list[tuple[int, int]]:
        return [grid.span(B) for B in self.balls]


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFn) else np.asarray(f, dtype=float)


def _nonempty_span(grid: Grid, ball: Ball) -> tuple[int, int]:
    lo, hi = grid.span(ball)
    if hi <= lo:
        raise EmptyBallError("empty ball")
    return lo, hi


def average(f: GridFn, ball: Ball) -> float:
    lo, hi = _nonempty_span(f.grid, ball)
    # (sum f h) / (count h), with the h cancelled
    return float(np.sum(f.values[lo:hi]) / (hi - lo))


def lq_mean(f: GridFn, ball: Ball, q: float) -> float:
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    lo, hi = _nonempty_span(f.grid, ball)
    return power_mean(f.values[lo:hi], q)


def power_mean(v: np.ndarray, q: float) -> float:
    """``(mean |v|^q)^(1/q)`` for a block of samples."""
    a = np.abs(v)
    if q == 1:
        return float(np.mean(a))
    top = float(np.max(a)) if a.size else 0.0
    if top == 0.0:
        return 0.0
    # scale out the max so small q does not underflow
    return top * float(np.mean((a / top) ** q)) ** (1.0 / q)


def restrict_inside(f: GridFn, ball: Ball) -> GridFn:
    return GridFn(f.grid, np.where(f.grid.mask(ball), f.values, 0.0))


def restrict_outside(f: GridFn, ball: Ball) -> GridFn:
    return GridFn(f.grid, np.where(f.grid.mask(ball), 0.0, f.values))


def _keep(grid: Grid, ball: Ball, rule: str) -> bool:
    lo, hi = grid.span(ball)
    if hi <= lo:
        return False
    if rule == REQUIRE_2B_INSIDE:
        return grid.contains(ball.dilate(2.0))
    return True


def equispaced_centers(grid: Grid, count: int) -> np.ndarray:
    return grid.left + grid.length * np.arange(1, count + 1) / (count + 1)


def dyadic_family(grid: Grid, centers: int | Sequence[float], scales: int,
                  rule: str = REQUIRE_2B_INSIDE, r_min: float | None = None) -> BallFamily:
    """Balls at equispaced (or given) centers with radii ``r_min * 2^k``.

    Ordered center-major, radius ascending.  ``r_min`` defaults to ``4h``.
    """
    if isinstance(centers, (int, np.integer)):
        if centers < 1:
            raise ValueError("centers must be >= 1")
        cs = equispaced_centers(grid, int(centers))
    else:
        cs = np.asarray(centers, dtype=float)
    if scales < 1:
        raise ValueError("scales must be >= 1")
    r0 = 4 * grid.h if r_min is None else float(r_min)
    balls = [Ball(float(c), r0 * 2.0 ** k) for c in cs for k in range(scales)]
    kept = [B for B in balls if _keep(grid, B, rule)]
    if not kept:
        raise EmptyFamilyError("empty family")
    return BallFamily(tuple(kept), rule)


def interval_family(grid: Grid, stride: int = 1, min_samples: int = 1,
                    rule: str = CLIP_TO_DOMAIN) -> BallFamily:
    """Grid-aligned intervals with endpoints on a lattice of ``stride`` cells."""
    h = grid.h
    cuts = np.arange(0, grid.n + 1, stride)
    if cuts[-1] != grid.n:
        cuts = np.append(cuts, grid.n)
    balls = []
    for a in range(len(cuts)):
        for b in range(a + 1, len(cuts)):
            if cuts[b] - cuts[a] < min_samples:
                continue
            lo = grid.left + cuts[a] * h
            hi = grid.left + cuts[b] * h
            B = Ball(0.5 * (lo + hi), 0.5 * (hi - lo))
            if _keep(grid, B, rule):
                balls.append(B)
    return BallFamily(tuple(balls), rule)


def family_from_spans(grid: Grid, spans, rule: str = CLIP_TO_DOMAIN) -> BallFamily:
    h = grid.h
    return BallFamily(tuple(Ball(grid.left + 0.5 * (lo + hi) * h, 0.5 * (hi - lo) * h)
                            for lo, hi in spans), rule)
