"""Inner infima over constants and over affine combinations ``c0 + c1 b``.

Two problems show up everywhere:

* ``inf_c (mean |v - c|^q)^(1/q)``                        (one parameter)
* ``inf_{c0,c1} (mean |g - c0 + c1 b|^q)^(1/q)``          (two parameters)

For ``q <= 1`` each ``|r_k|^q`` is concave (``q < 1``) or linear (``q = 1``)
on every cell where the residual signs are fixed, and the objective is bounded
below, so the infimum is attained at a vertex of the arrangement of the lines
``r_k = 0``.  In one parameter the vertices are the data values; in two they
are lines through two data points.  For ``q = 1`` the objective is convex, so a
vertex with no improving move along its two lines is a global minimizer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

EXACT_LIMIT = 192
_BLOCK = 1 << 22


@dataclass(frozen=True)
class AffineFit:
    c0: float
    c1: float
    value: float
    q: float
    nonconvex: bool = False
    converged: bool = True

    def residual(self, g: np.ndarray, b: np.ndarray) -> np.ndarray:
        return g - self.c0 + self.c1 * b


def _objective_sum(r: np.ndarray, q: float, axis=None):
    a = np.abs(r)
    if q == 1:
        return np.sum(a, axis=axis)
    if q == 2:
        return np.sum(a * a, axis=axis)
    return np.sum(a ** q, axis=axis)


def _value(total: float, count: int, q: float) -> float:
    return (max(total, 0.0) / count) ** (1.0 / q)


def lq_value(r: np.ndarray, q: float) -> float:
    return _value(float(_objective_sum(r, q)), r.size, q)


# ---------------------------------------------------------------- one parameter

def best_constant(v: np.ndarray, q: float) -> tuple[float, float]:
    """Minimizer and value of ``inf_c (mean |v - c|^q)^(1/q)``."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample block")
    if q == 2:
        c = float(np.mean(v))
        return c, lq_value(v - c, q)
    if q == 1:
        c = float(np.median(v))
        return c, lq_value(v - c, q)
    if q < 1:
        cand = np.unique(v)
        best_c, best = float(cand[0]), math.inf
        step = max(1, _BLOCK // max(v.size, 1))
        for start in range(0, cand.size, step):
            cs = cand[start:start + step]
            tot = _objective_sum(v[None, :] - cs[:, None], q, axis=1)
            k = int(np.argmin(tot))
            if tot[k] < best:
                best, best_c = float(tot[k]), float(cs[k])
        return best_c, _value(best, v.size, q)
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi == lo:
        return lo, 0.0
    res = optimize.minimize_scalar(lambda c: float(_objective_sum(v - c, q)),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13 * max(abs(lo), abs(hi), 1.0)})
    c = float(res.x)
    return c, lq_value(v - c, q)


# ---------------------------------------------------------------- two parameters
# Internally the affine part is a + s*b and the residual is g - a - s*b.
# The reported coefficients follow the printed convention g - c0 + c1*b,
# so c0 = a and c1 = -s.

def _flat(b: np.ndarray) -> bool:
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    return float(np.ptp(b)) <= 1e-13 * max(scale, 1e-300)


def _least_squares(g, b, weights=None):
    w = np.ones_like(g) if weights is None else weights
    sw = np.sum(w)
    gm = np.sum(w * g) / sw
    bm = np.sum(w * b) / sw
    db = b - bm
    var = np.sum(w * db * db)
    if var <= 1e-26 * max(np.sum(w * b * b), 1e-300):
        return float(gm), 0.0
    s = np.sum(w * db * (g - gm)) / var
    return float(gm - s * bm), float(s)


def _best_line_through(g, b, i, q):
    """Best line through point ``i`` (exact along that pencil of lines)."""
    db = b - b[i]
    dg = g - g[i]
    ok = np.flatnonzero(db != 0)
    if ok.size == 0:
        return math.inf, None
    slopes = dg[ok] / db[ok]
    best, best_k = math.inf, None
    step = max(1, _BLOCK // max(g.size, 1))
    for start in range(0, slopes.size, step):
        s = slopes[start:start + step]
        R = dg[None, :] - s[:, None] * db[None, :]
        R[:, i] = 0.0
        R[np.arange(s.size), ok[start:start + step]] = 0.0
        tot = _objective_sum(R, q, axis=1)
        k = int(np.argmin(tot))
        if tot[k] < best:
            best, best_k = float(tot[k]), int(ok[start + k])
    return best, best_k


def _line(g, b, i, j):
    s = (g[j] - g[i]) / (b[j] - b[i])
    return float(g[i] - s * b[i]), float(s)


def _vertex_descent(g, b, q, a, s, max_iter=500):
    """Walk from the line ``a + s b`` to a vertex, then along vertex edges."""
    r = g - s * b
    tot = _objective_sum(r[None, :] - np.unique(r)[:, None], q, axis=1) if r.size <= 4096 else None
    if tot is None:
        i = int(np.argmin(np.abs(r - a)))
    else:
        cand = np.unique(r)
        i = int(np.flatnonzero(r == cand[int(np.argmin(tot))])[0])
    cur, j = _best_line_through(g, b, i, q)
    if j is None:
        return float(_objective_sum(g - a - s * b, q)), a, s, True
    pivots = (i, j)
    done = False
    for _ in range(max_iter):
        moved = False
        for p in pivots:
            val, k = _best_line_through(g, b, p, q)
            if k is not None and val < cur * (1 - 1e-15) - 1e-300:
                cur, pivots, moved = val, (p, k), True
                break
        if not moved:
            done = True
            break
    a, s = _line(g, b, *pivots)
    return cur, a, s, done


def _enumerate_vertices(g, b, q):
    n = g.size
    best, best_pair = math.inf, None
    for i in range(n - 1):
        db = b[i + 1:] - b[i]
        ok = np.flatnonzero(db != 0)
        if ok.size == 0:
            continue
        js = ok + i + 1
        slopes = (g[js] - g[i]) / db[ok]
        R = (g[None, :] - g[i]) - slopes[:, None] * (b[None, :] - b[i])
        R[:, i] = 0.0
        R[np.arange(js.size), js] = 0.0
        tot = _objective_sum(R, q, axis=1)
        k = int(np.argmin(tot))
        if tot[k] < best:
            best, best_pair = float(tot[k]), (i, int(js[k]))
    return best, best_pair


def _irls_l1(g, b, max_iter=200):
    a, s = _least_squares(g, b)
    scale = float(np.max(np.abs(g - a - s * b)))
    if scale <= 1e-15 * max(float(np.max(np.abs(g))), 1e-300):
        return a, s  # g is affine in b up to rounding
    eps = 1e-2 * scale
    prev = math.inf
    for _ in range(max_iter):
        r = g - a - s * b
        obj = float(np.sum(np.abs(r)))
        if prev - obj < 1e-11 * max(prev, 1e-300) and eps <= 1e-12 * scale:
            break
        prev = obj
        # weights eps / max(|r|, eps) lie in (0, 1], so nothing overflows
        a, s = _least_squares(g, b, eps / np.maximum(np.abs(r), eps))
        eps = max(eps * 0.1, 1e-12 * scale)
    return a, s


def _quantile_starts(g, b, count=8):
    order = np.argsort(b, kind="stable")
    n = order.size
    levels = [0.1, 0.3, 0.5, 0.7, 0.9]
    idx = [order[min(n - 1, int(t * n))] for t in levels]
    pairs = [(idx[u], idx[v]) for u in range(len(idx)) for v in range(u + 1, len(idx))]
    out = []
    for i, j in pairs:
        if b[i] != b[j]:
            out.append(_line(g, b, i, j))
        if len(out) == count:
            break
    return out


def affine_fit(g, b, q: float, starts=(), exact_limit: int = EXACT_LIMIT) -> AffineFit:
    """``inf_{c0,c1} (mean |g - c0 + c1 b|^q)^(1/q)`` over one ball's samples.

    ``starts`` are extra ``(c0, c1)`` initial points (used by the local search
    when the block is too large for exhaustive vertex enumeration).
    """
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    if g.shape != b.shape or g.size == 0:
        raise ValueError("g and b must be nonempty blocks of equal length")
    n = g.size
    if _flat(b):
        c, val = best_constant(g, q)
        return AffineFit(c, 0.0, val, q, nonconvex=q < 1)
    if q == 2:
        a, s = _least_squares(g, b)
        return AffineFit(a, -s, lq_value(g - a - s * b, q), q)
    if q > 1:
        a0, s0 = _least_squares(g, b)
        res = optimize.minimize(lambda p: float(_objective_sum(g - p[0] - p[1] * b, q)),
                                x0=[a0, s0], method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        a, s = map(float, res.x)
        return AffineFit(a, -s, lq_value(g - a - s * b, q), q, converged=bool(res.success))
    if q == 1:
        a, s = _irls_l1(g, b)
        tot, a, s, done = _vertex_descent(g, b, q, a, s)
        return AffineFit(a, -s, _value(tot, n, q), q, converged=done)
    # q < 1: nonconvex
    if n <= exact_limit:
        tot, pair = _enumerate_vertices(g, b, q)
        a, s = _line(g, b, *pair)
        return AffineFit(a, -s, _value(tot, n, q), q, nonconvex=True)
    inits = [_least_squares(g, b), _irls_l1(g, b), *_quantile_starts(g, b)]
    inits += [(float(c0), -float(c1)) for c0, c1 in starts]
    best = None
    for a0, s0 in inits:
        tot, a, s, done = _vertex_descent(g, b, q, a0, s0)
        if best is None or tot < best[0]:
            best = (tot, a, s, done)
    tot, a, s, done = best
    return AffineFit(a, -s, _value(tot, n, q), q, nonconvex=True, converged=done)
