"""Calderón–Zygmund kernels on a uniform grid.

All built-in kernels are of convolution type, so they are evaluated on the
exact integer offsets ``(i - j) h`` rather than on differences of rounded
sample positions; this keeps odd kernels exactly odd on the grid.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class Modulus:
    """Smoothness modulus ``omega``: ``scale * t^gamma`` or a tabulated curve."""

    kind: str = "power"
    gamma: float = 1.0
    scale: float = 1.0
    table_t: tuple[float, ...] = ()
    table_w: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if not 0 < self.gamma <= 1:
                raise ValueError("power modulus needs gamma in (0, 1]")
        elif self.kind == "tabulated":
            t = np.asarray(self.table_t, dtype=float)
            w = np.asarray(self.table_w, dtype=float)
            if t.size < 2 or t.shape != w.shape or np.any(np.diff(t) <= 0):
                raise ValueError("tabulated modulus needs increasing abscissae")
            if np.any(np.diff(w) < 0):
                raise ValueError("modulus must be nondecreasing")
        else:
            raise ValueError(f"unknown modulus kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return self.scale * t ** self.gamma
        return np.interp(t, self.table_t, self.table_w)

    def dyadic_sum(self, j_max: int) -> float:
        """``sum_{j=1}^{j_max} omega(2^-j)``."""
        if j_max < 1:
            return 0.0
        return float(np.sum(self(2.0 ** -np.arange(1, j_max + 1))))

    def log_dini_integral(self, points: int = 4000) -> float:
        """``int_0^1 omega(t) log(1/t) dt / t`` by substitution ``t = e^-u``."""
        if self.kind == "power":
            return self.scale / self.gamma ** 2
        u = np.linspace(0.0, 60.0, points)
        return float(np.trapezoid(self(np.exp(-u)) * u, u))


@dataclass(frozen=True)
class TruncationRule:
    """Symmetric exclusion ``|x - y| <= epsilon`` around the diagonal."""

    epsilon: float | None = None

    def radius(self, grid: Grid) -> float:
        eps = grid.h if self.epsilon is None else float(self.epsilon)
        if eps < grid.h / 2 * (1 - 1e-12):
            raise ValueError("truncation epsilon must be at least h/2")
        return eps

    def offset_cutoff(self, grid: Grid) -> int:
        """Largest excluded index offset ``k`` (``k h <= epsilon``)."""
        return int(math.floor(self.radius(grid) / grid.h * (1 + 1e-9)))


DEFAULT_TRUNCATION = TruncationRule()


@dataclass(frozen=True)
class KernelSpec:
    """A convolution kernel ``K(x, y) = k(x - y)``."""

    name: str
    profile: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    c_k: float
    omega: Modulus

    def eval(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return self.profile(d)

    def offsets_matrix(self, grid: Grid, rows, cols, trunc: TruncationRule = DEFAULT_TRUNCATION):
        """``K(x_i, y_j)`` for ``i`` in rows, ``j`` in cols, zero where truncated."""
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        off = rows[:, None] - cols[None, :]
        keep = np.abs(off) > trunc.offset_cutoff(grid)
        d = np.where(keep, off, 1) * grid.h
        return np.where(keep, self.profile(d), 0.0)


def _hilbert_profile(d):
    return 1.0 / (math.pi * d)


def hilbert() -> KernelSpec:
    # |K(x,y)-K(z,y)| = |x-z| / (pi |x-y||z-y|) <= (2/pi) t / |x-y| for t <= 1/2,
    # doubled for the adjoint term.
    return KernelSpec("hilbert", _hilbert_profile, 1.0 / math.pi,
                      Modulus("power", 1.0, 4.0 / math.pi))


def power_dini(gamma: float) -> KernelSpec:
    """Odd kernel ``sgn(t) (1 + min(1,|t|)^gamma / 2) / (pi |t|)`` with ``omega ~ t^gamma``."""
    if not 0 < gamma <= 1:
        raise ValueError("power_dini needs gamma in (0, 1]")

    def profile(d):
        a = np.abs(d)
        return np.sign(d) * (1.0 + 0.5 * np.minimum(1.0, a) ** gamma) / (math.pi * a)

    return KernelSpec(f"power_dini({gamma:g})", profile, 1.5 / math.pi,
                      Modulus("power", gamma, 8.0 / math.pi))


@dataclass(frozen=True)
class BilinearKernelSpec:
    """``K(x, y1, y2)``; separable kernels factor as ``k1(x - y1) k2(x - y2)``."""

    name: str
    c_k: float
    omega: Modulus
    factors: tuple[KernelSpec, KernelSpec] | None = None
    trivariate: Callable | None = field(default=None, compare=False, repr=False)

    def eval(self, x, y1, y2):
        if self.factors is not None:
            k1, k2 = self.factors
            return k1.eval(x, y1) * k2.eval(x, y2)
        return self.trivariate(np.asarray(x, float), np.asarray(y1, float), np.asarray(y2, float))


def tensor_hilbert() -> BilinearKernelSpec:
    """``1 / (pi^2 (x - y1)(x - y2))`` so that ``T(f, g) = Hf * Hg``.

    This kernel is not a bilinear CZ kernel in the strict sense: the ratio
    ``|K| (|x-y1| + |x-y2|)^2`` is unbounded.  On a truncated grid it is
    bounded by roughly ``diam / epsilon``; see :func:`measured_size_constant`.
    """
    H = hilbert()
    return BilinearKernelSpec("tensor_hilbert", 1.0 / math.pi ** 2, H.omega, (H, H))


def measured_size_constant(K: KernelSpec, grid: Grid, trunc=DEFAULT_TRUNCATION) -> float:
    """``max |K(x,y)| |x-y|`` over all untruncated sample pairs."""
    k = np.arange(trunc.offset_cutoff(grid) + 1, grid.n)
    if k.size == 0:
        return 0.0
    d = np.concatenate([k, -k]) * grid.h
    return float(np.max(np.abs(K.profile(d)) * np.abs(d)))


def measured_bilinear_size_constant(K2: BilinearKernelSpec, grid: Grid, x_index: int,
                                    trunc=DEFAULT_TRUNCATION) -> float:
    """``max |K(x,y1,y2)| (|x-y1| + |x-y2|)^2`` at one output sample."""
    j = np.arange(grid.n)
    off = x_index - j
    keep = np.abs(off) > trunc.offset_cutoff(grid)
    y = grid.x[keep]
    x = grid.x[x_index]
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    vals = np.abs(K2.eval(x, Y1, Y2)) * (np.abs(x - Y1) + np.abs(x - Y2)) ** 2
    return float(np.max(vals))


_POWER_DINI = re.compile(r"^power_dini\(\s*([0-9.eE+-]+)\s*\)$")


def kernel_by_name(name: str):
    """Resolve ``"hilbert"``, ``"power_dini(g)"`` or ``"tensor_hilbert"``."""
    name = name.strip()
    if name == "hilbert":
        return hilbert()
    if name == "tensor_hilbert":
        return tensor_hilbert()
    m = _POWER_DINI.match(name)
    if m:
        return power_dini(float(m.group(1)))
    raise KeyError(f"unknown kernel {name!r}")
