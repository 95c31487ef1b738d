"""Experiment suites: each turns a validated config into a :class:`Report`.

Rows are pure functions of (config, row index).  When ``threads > 1`` rows
run on a thread pool, but results are collected in index order so the output
does not depend on scheduling.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..bmo import bmo_b_q_fits, bmo_norm, jn_check, mean_oscillation
from ..grid import Ball, BallFamily, GridFn
from ..kernels import BilinearKernelSpec, KernelSpec
from ..operators import (ALL_INTERVALS, bilinear_apply, bilinear_commutator,
                         bilinear_grand_maximal, commutator, cz_maximal_truncation,
                         grand_maximal, maximal, maximal_power, multilinear_maximal)
from ..oscillation import (double_inf_osc, modified_osc_fixed_c2,
                           modified_osc_multilinear, proof_decomposition_linear, rhs_linear,
                           sharp_profile, _ratio)
from ..weights import (Weight, a1_constant, ap_constant, ap_vec_constant, m_r_weight)
from .config import (Cfg, ConfigError, build_family, build_functions, build_grid, build_kernel,
                     build_symbol, build_truncation, build_weights, grid_sizes, validate)
from .report import Check, RatioRow, Report, make_report, summarize


def pmap(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _as_list(v) -> list[float]:
    if isinstance(v, Cfg):
        v = v.data
    return [float(x) for x in v] if isinstance(v, list) else [float(v)]


def _param_list(p: Cfg, key: str, default) -> list[float]:
    if not p.has(key):
        return list(default)
    v = p.get(key)
    vals = v.data if isinstance(v, Cfg) else v
    if isinstance(vals, list):
        return p.numbers(key)
    return [p.number(key)]


def _maximal_family(cfg: Cfg, grid):
    p = cfg.section("params")
    mode = p.string("maximal_family", ALL_INTERVALS)
    if mode == ALL_INTERVALS:
        return ALL_INTERVALS
    if mode == "balls":
        return build_family(cfg, grid)
    raise ConfigError("params.maximal_family", f"expected 'all_intervals' or 'balls', got {mode!r}")


def _spread(values) -> float:
    """``max / min`` of nonnegative values; 1 when all vanish, inf when only some do."""
    v = [float(x) for x in values]
    if not v or max(v) == 0:
        return 1.0
    if min(v) <= 0:
        return math.inf
    return max(v) / min(v)


def _rel_dev(values) -> float:
    """Largest ``|v / v_ref - 1|`` with the last (finest) entry as reference."""
    ref = values[-1]
    if ref == 0:
        return 0.0 if all(v == 0 for v in values) else math.inf
    return max(abs(v / ref - 1) for v in values)


def _lp(v: np.ndarray, h: float, p: float, w: np.ndarray | None = None) -> float:
    """Discrete ``(h sum |v|^p w)^(1/p)``."""
    a = np.abs(v) ** p
    if w is not None:
        a = a * w
    return float((h * np.sum(a)) ** (1.0 / p))


# ------------------------------------------------------------------ checks

def evaluate_checks(cfg: Cfg, metrics: dict) -> list[Check]:
    """``checks: {metric: {"max": x} | {"min": x} | {"range": [lo, hi]} | {"equals": v}}``.

    A list-valued metric passes when every entry passes.
    """
    out = []
    if not cfg.has("checks"):
        return out
    sec = cfg.section("checks")
    for name in sec.data:
        spec = sec.section(name)
        if name not in metrics:
            raise ConfigError(spec.path, f"unknown metric {name!r}")
        value = metrics[name]
        vals = value if isinstance(value, list) else [value]
        if spec.has("max"):
            thr = spec.number("max")
            ok = all(v is not None and v <= thr for v in vals)
            desc = f"<= {thr:g}"
        elif spec.has("min"):
            thr = spec.number("min")
            ok = all(v is not None and v >= thr for v in vals)
            desc = f">= {thr:g}"
        elif spec.has("range"):
            lo, hi = spec.numbers("range")
            ok = all(v is not None and lo <= v <= hi for v in vals)
            desc = f"in [{lo:g}, {hi:g}]"
        elif spec.has("equals"):
            target = spec.get("equals")
            ok = all(v == target for v in vals)
            desc = f"== {target!r}"
        else:
            raise ConfigError(spec.path, "expected one of max, min, range, equals")
        out.append(Check(name, value, desc, bool(ok)))
    return out


def _finish(cfg: Cfg, suite: str, rows, metrics) -> Report:
    return make_report(cfg.string("scenario_id"), suite, cfg.data, rows,
                       evaluate_checks(cfg, metrics), metrics)


def _ball_row(sid, B: Ball, lhs, rhs, flags=(), group="", extra=None) -> RatioRow:
    return RatioRow(sid, B.center, B.radius, float(lhs), float(rhs), _ratio(lhs, rhs),
                    tuple(flags), group, extra or {})


# ------------------------------------------------------------------ osc-sweep

def run_osc_sweep(data: dict, threads: int = 1) -> Report:
    """Modified oscillation against the weighted right-hand side, one row per
    (weight, f, ball, delta, r)."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    b = build_symbol(cfg, grid)
    family = build_family(cfg, grid)
    p = cfg.section("params")
    deltas = _param_list(p, "delta", [0.5])
    rs = _param_list(p, "r", [2.0])
    with_double = bool(p.get("double_inf", False))
    mfam = _maximal_family(cfg, grid)
    nb = bmo_norm(b, family)

    combos = []
    for wl, w in build_weights(cfg, grid, seed=cfg.integer("seed", 0)):
        mrws = {r: m_r_weight(w, r, mfam) for r in rs}
        for fl, f in build_functions(cfg, grid, w):
            combos.append((wl, w, fl, f, mrws, commutator(b, K, f, trunc)))
    tasks = [(c, B, d, r) for c in combos for B in family for d in deltas for r in rs]

    def row(task):
        (wl, w, fl, f, mrws, comm), B, d, r = task
        rep = modified_osc_fixed_c2(b, K, f, B, d, trunc, comm)
        rep = rep.with_rhs(rhs_linear(f, w, b, B, r, family, mfam, nb, mrws[r]))
        extra = {"weight": wl, "f": fl, "delta": d, "r": r, "c1": rep.minimizers["c1"],
                 "c2": rep.minimizers["c2"]}
        flags = rep.flags
        if with_double:
            dbl = double_inf_osc(b, K, f, B, d, trunc, comm)
            extra["double_inf"] = dbl.lhs
            flags = flags + dbl.flags
            if dbl.lhs > rep.lhs + 1e-9:
                flags = flags + ("order_violation",)
        return _ball_row(sid, B, rep.lhs, rep.rhs, flags, f"{wl}|{fl}|d={d:g}|r={r:g}", extra)

    rows = pmap(row, tasks, threads)
    s = summarize(rows)
    groups = s["groups"].values()
    metrics = {
        "bmo_norm": nb,
        "all_finite": s["all_finite"],
        "max_ratio": s["max_ratio"],
        "pooled_max_over_median": _div(s["max_ratio"], s["median_ratio"]),
        "pooled_slope": s["trend_slope"],
        "group_max_over_median": [_div(g["max_ratio"], g["median_ratio"]) for g in groups],
        "group_slopes": [g["trend_slope"] for g in groups],
        "order_violations": s["flags"].get("order_violation", 0),
    }
    return _finish(cfg, "osc-sweep", rows, metrics)


def _div(a, b):
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


# ------------------------------------------------------------------ hst-contrast

def run_hst_contrast(data: dict, threads: int = 1) -> Report:
    """Classical vs modified oscillation of ``[b,T] f_j`` on a fixed ball, where
    ``f_j`` is the indicator of ``[s r, s r 2^j]`` (``s`` = ``support_start``)."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    b = build_symbol(cfg, grid)
    p = cfg.section("params")
    c, r = p.numbers("ball")
    B = Ball(c, r)
    if not grid.contains(B.dilate(2.0)):
        raise ConfigError("params.ball", "2B must lie inside the domain")
    delta = p.number("delta", 0.5)
    j_max = p.integer("j_max", 7)
    start = p.number("support_start", 8.0)
    x = grid.x

    def row(j):
        lo, hi = c + start * r, c + start * r * 2.0 ** j
        flags = ()
        if hi > grid.right:
            hi, flags = grid.right, ("truncated",)
        f = GridFn(grid, ((x >= lo) & (x <= hi)).astype(float))
        lo_, hi_ = grid.span(B)
        cl = mean_oscillation(commutator(b, K, f, trunc, at=np.arange(lo_, hi_)))
        mod = modified_osc_fixed_c2(b, K, f, B, delta, trunc)
        return _ball_row(sid, B, cl, mod.lhs, flags, "",
                         {"j": j, "support": [lo, hi], "classical": cl, "modified": mod.lhs})

    rows = pmap(row, range(1, j_max + 1), threads)
    cl = [rw.extra["classical"] for rw in rows]
    md = [rw.extra["modified"] for rw in rows]
    metrics = {"classical": cl, "modified": md,
               "classical_growth": _div(cl[-1], cl[0]),
               "modified_spread": _spread(md),
               "truncated": any("truncated" in rw.flags for rw in rows)}
    return _finish(cfg, "hst-contrast", rows, metrics)


# ------------------------------------------------------------------ bmo

def run_bmo(data: dict, threads: int = 1) -> Report:
    """Mean oscillation of ``f`` against its ``BMO_b^q`` value on shrinking balls.

    Row ``k`` uses the ball ``(center, 2^-k)``; lhs is ``mean_B |f - f_B|`` and
    rhs is ``inf_{c0,c1} (mean_B |f - c0 + c1 b|^q)^(1/q)``.
    """
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    b = build_symbol(cfg, grid)
    f = build_symbol(cfg, grid, "target")
    p = cfg.section("params")
    q = p.number("q", 2.0)
    center = p.number("center", 0.0)
    ks = range(p.integer("k_min", 1), p.integer("k_max", 8) + 1)
    alphas = _param_list(p, "jn_alphas", [])

    def row(k):
        B = Ball(center, 2.0 ** -k)
        lo, hi = grid.span(B)
        osc = mean_oscillation(f.values[lo:hi])
        fit = bmo_b_q_fits(f, b, q, BallFamily((B,)))[0].fit
        flags = (("nonconvex",) if fit.nonconvex else ()) + (() if fit.converged else ("not_converged",))
        return _ball_row(sid, B, osc, fit.value, flags, "",
                         {"k": k, "samples": hi - lo, "c0": fit.c0, "c1": fit.c1})

    rows = pmap(row, ks, threads)
    osc = [rw.lhs for rw in rows]
    fits = [rw.rhs for rw in rows]
    two_step = [osc[i + 2] / osc[i] for i in range(len(osc) - 2) if osc[i] > 0]
    diffs = [osc[i + 1] - osc[i] for i in range(len(osc) - 1)]
    metrics = {"oscillation": osc, "bmo_b_q": fits,
               "two_step_growth": two_step,
               "min_two_step_growth": min(two_step) if two_step else None,
               "oscillation_increments": diffs,
               "min_increment": min(diffs) if diffs else None,
               "bmo_b_q_spread": _spread(fits)}
    if alphas:
        fam = BallFamily(tuple(Ball(center, 2.0 ** -k) for k in ks))
        metrics["jn_ratios"] = [jn_check(f, a, fam) for a in alphas]
    return _finish(cfg, "bmo", rows, metrics)


# ------------------------------------------------------------------ constants

def run_constants(data: dict, threads: int = 1) -> Report:
    """Muckenhoupt constants per (weight, p) with the duality identity residual."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    family = build_family(cfg, grid)
    ps = _param_list(cfg.section("params"), "p", [2.0])
    tasks = [(wl, w, p) for wl, w in build_weights(cfg, grid, seed=cfg.integer("seed", 0))
             for p in ps]

    def row(task):
        wl, w, p = task
        ap = ap_constant(w, p, family)
        sigma = Weight.from_values(grid, w.values ** (-1.0 / (p - 1)))
        dual = ap_constant(sigma, p / (p - 1), family)
        dual_err = abs(dual - ap ** (1.0 / (p - 1))) / ap ** (1.0 / (p - 1))
        vec = ap_vec_constant([w, w], [2 * p, 2 * p], family)
        a1 = a1_constant(w, family)
        return RatioRow(sid, None, None, ap, 1.0, ap, (), wl,
                        {"weight": wl, "p": p, "ap": ap, "a1": a1, "dual": dual,
                         "dual_rel_error": dual_err, "ap_vec_pair": vec})

    rows = pmap(row, tasks, threads)
    metrics = {"min_ap": min(r.lhs for r in rows),
               "max_dual_rel_error": max(r.extra["dual_rel_error"] for r in rows)}
    return _finish(cfg, "constants", rows, metrics)


# ------------------------------------------------------------------ endpoint

def phi(t):
    """Orlicz function ``t log(e + t)``."""
    return t * np.log(math.e + t)


def endpoint_rows(sid, b, K, f, w: Weight, wl: str, ts, trunc, group: str) -> list[RatioRow]:
    grid = f.grid
    a1 = a1_constant(w)
    comm = np.abs(commutator(b, K, f, trunc).values)
    scale = a1 ** 2 * math.log(math.e + a1)
    rows = []
    for t in ts:
        lhs = grid.h * float(np.sum(w.values[comm > t]))
        rhs = scale * grid.h * float(np.sum(phi(np.abs(f.values) / t) * w.values))
        rows.append(RatioRow(sid, None, None, lhs, rhs, _ratio(lhs, rhs), (), group,
                             {"t": t, "weight": wl, "a1": a1, "n": grid.n}))
    return rows


def run_endpoint_orlicz(data: dict, threads: int = 1) -> Report:
    """Weighted level sets of the commutator against the ``L log L`` bound, per t."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    tg = cfg.section("params").section("t_grid")
    ts = list(np.geomspace(tg.number("min"), tg.number("max"), tg.integer("count")))
    sizes = grid_sizes(cfg)
    tasks = []
    for n in sizes:
        grid = build_grid(cfg, n)
        b = build_symbol(cfg, grid)
        for wl, w in build_weights(cfg, grid, seed=cfg.integer("seed", 0)):
            for fl, f in build_functions(cfg, grid, w):
                tasks.append((n, b, f, fl, w, wl))

    def run(task):
        n, b, f, fl, w, wl = task
        return endpoint_rows(sid, b, K, f, w, wl, ts, trunc, f"n={n}|{wl}|{fl}")

    rows = [r for chunk in pmap(run, tasks, threads) for r in chunk]
    sups: dict[str, dict[int, float]] = {}
    for r in rows:
        key = r.group.split("|", 1)[1]
        n = r.extra["n"]
        sups.setdefault(key, {})[n] = max(sups.get(key, {}).get(n, 0.0), r.ratio)
    spreads = {k: _spread([v[n] for n in sizes]) for k, v in sups.items()}
    metrics = {"sup_ratio": {k: [v[n] for n in sizes] for k, v in sups.items()},
               "all_finite": all(math.isfinite(r.ratio) for r in rows),
               "max_sup_ratio": max(max(v.values()) for v in sups.values()),
               "stability_spread": max(spreads.values())}
    return _finish(cfg, "endpoint", rows, metrics)


# ------------------------------------------------------------------ extrapolate

def run_extrapolation_check(data: dict, threads: int = 1) -> Report:
    """Measured ``c_v`` for the linear and bilinear commutators in weighted ``L^p``."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    b = build_symbol(cfg, grid)
    family = build_family(cfg, grid)
    nb = bmo_norm(b, family)
    ps = _param_list(cfg.section("params"), "p", [1.5, 2.0, 3.0])
    weights = build_weights(cfg, grid, seed=cfg.integer("seed", 0))
    fs = build_functions(cfg, grid)
    h = grid.h
    tasks = [("linear", fl, f, None, None, wl, w, p)
             for fl, f in fs for wl, w in weights for p in ps]
    if cfg.has("bilinear_kernel"):
        K2 = build_kernel(cfg, "bilinear_kernel")
        gs = build_functions(cfg, grid, key="g_functions")
        tasks += [("bilinear", fl, f, gl, g, wl, w, p)
                  for fl, f in fs for gl, g in gs for wl, w in weights for p in ps]
    comms = {fl: commutator(b, K, f, trunc).values for fl, f in fs}

    def row(task):
        kind, fl, f, gl, g, wl, w, p = task
        if kind == "linear":
            lhs = _lp(comms[fl], h, p, w.values)
            rhs = nb * _lp(f.values, h, p, w.values)
            ap = ap_constant(w, p, family) if p > 1 else None
            extra = {"kind": kind, "f": fl, "weight": wl, "p": p, "weight_constant": ap}
        else:
            c = bilinear_commutator(b, K2, f, g, trunc).values
            v = w.values ** 2
            ptot = p / 2
            lhs = _lp(c * v, h, ptot)
            rhs = nb * _lp(f.values * w.values, h, p) * _lp(g.values * w.values, h, p)
            apv = ap_vec_constant([w, w], [p, p], family)
            extra = {"kind": kind, "f": fl, "g": gl, "weight": wl, "p": p,
                     "weight_constant": apv}
        if rhs > 0:
            flags = ()
        elif nb == 0:
            flags = ("degenerate",)  # constant symbol: the commutator is rounding noise
        else:
            flags = ("zero_norm",)
        return RatioRow(sid, None, None, lhs, rhs, _ratio(lhs, rhs), flags,
                        f"{kind}|p={p:g}", extra)

    rows = pmap(row, tasks, threads)
    counted = [r for r in rows if r.counted]
    metrics = {"bmo_norm": nb,
               "all_finite": all(math.isfinite(r.ratio) for r in counted),
               "max_linear": max((r.ratio for r in counted if r.extra["kind"] == "linear"),
                                 default=0.0),
               "max_bilinear": max((r.ratio for r in counted if r.extra["kind"] == "bilinear"),
                                   default=0.0),
               "zero_norm_rows": sum(1 for r in rows if "zero_norm" in r.flags)}
    return _finish(cfg, "extrapolate", rows, metrics)


# ------------------------------------------------------------------ grand maximal

def grand_maximal_rows(sid, K, K2, f, g, family, trunc, group_prefix: str) -> list[RatioRow]:
    """Per-sample ``M_T f / (M f + T* f)`` and, with ``K2``, the bilinear analog
    ``M_T(f, g) / (M(f, g) + M_(1/2)(T(f, g)))``.  Only covered samples appear."""
    grid = f.grid
    x = grid.x
    rows = []
    mt = grand_maximal(K, f, family, trunc).values
    den = maximal(f).values + cz_maximal_truncation(K, f).values
    for i in np.flatnonzero(mt > 0):
        rows.append(RatioRow(sid, float(x[i]), None, float(mt[i]), float(den[i]),
                             _ratio(mt[i], den[i]), (), f"{group_prefix}|linear", {"i": int(i)}))
    if K2 is not None:
        mt2 = bilinear_grand_maximal(K2, f, g, family, trunc).values
        den2 = (multilinear_maximal([f, g]).values
                + maximal_power(bilinear_apply(K2, f, g, trunc), 0.5).values)
        for i in np.flatnonzero(mt2 > 0):
            rows.append(RatioRow(sid, float(x[i]), None, float(mt2[i]), float(den2[i]),
                                 _ratio(mt2[i], den2[i]), (), f"{group_prefix}|bilinear",
                                 {"i": int(i)}))
    return rows


def run_grand_maximal_domination(data: dict, threads: int = 1) -> Report:
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    K = build_kernel(cfg)
    K2 = build_kernel(cfg, "bilinear_kernel") if cfg.has("bilinear_kernel") else None
    trunc = build_truncation(cfg)
    sizes = grid_sizes(cfg)

    def run(n):
        grid = build_grid(cfg, n)
        family = build_family(cfg, grid)
        (fl, f), = build_functions(cfg, grid)[:1]
        g = build_functions(cfg, grid, key="g_functions")[0][1] if cfg.has("g_functions") else f
        return grand_maximal_rows(sid, K, K2, f, g, family, trunc, f"n={n}")

    rows = [r for chunk in pmap(run, sizes, threads) for r in chunk]
    metrics = {}
    for kind in ("linear", "bilinear"):
        cs = [max((r.ratio for r in rows if r.group == f"n={n}|{kind}"), default=None)
              for n in sizes]
        if any(c is None for c in cs):
            continue
        metrics[f"{kind}_constants"] = cs
        metrics[f"{kind}_rel_deviation"] = _rel_dev(cs)
    return _finish(cfg, "grand-maximal", rows, metrics)


# ------------------------------------------------------------------ operator norm

def estimate_maximal_opnorm(p: float, w: Weight, fs, family=ALL_INTERVALS) -> tuple[float, int]:
    """Lower bound ``max_f ||M f||_{L^p(w)} / ||f||_{L^p(w)}`` and the maximizing index."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    h = w.grid.h
    best, arg = 0.0, -1
    for k, f in enumerate(fs):
        den = _lp(f.values, h, p, w.values)
        if den == 0:
            continue
        q = _lp(maximal(f, family).values, h, p, w.values) / den
        if q > best:
            best, arg = q, k
    return best, arg


def run_opnorm(data: dict, threads: int = 1) -> Report:
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    grid = build_grid(cfg)
    family = build_family(cfg, grid) if cfg.has("balls") else None
    ps = _param_list(cfg.section("params"), "p", [2.0])
    fs = build_functions(cfg, grid)
    tasks = [(wl, w, fl, f, p) for wl, w in build_weights(cfg, grid, seed=cfg.integer("seed", 0))
             for fl, f in fs for p in ps]

    def row(task):
        wl, w, fl, f, p = task
        val, _ = estimate_maximal_opnorm(p, w, [f])
        env = None
        if family is not None:
            env = ap_constant(w, p, family) ** (1.0 / (p - 1))
        return RatioRow(sid, None, None, val, 1.0, val, (), f"{wl}|p={p:g}",
                        {"weight": wl, "f": fl, "p": p, "ap_envelope": env})

    rows = pmap(row, tasks, threads)
    lower = {}
    for r in rows:
        lower[r.group] = max(lower.get(r.group, 0.0), r.ratio)
    metrics = {"lower_bounds": lower, "min_ratio": min(r.ratio for r in rows)}
    return _finish(cfg, "opnorm", rows, metrics)


# ------------------------------------------------------------------ decompositions

def run_decomposition(data: dict, threads: int = 1) -> Report:
    """Per-term measured constants of the linear (and bilinear) proof decompositions
    across grid refinements."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    p = cfg.section("params")
    delta = p.number("delta", 0.5)
    eps = p.number("epsilon", 0.75)
    r = p.number("r", 2.0)
    tasks = []
    for n in grid_sizes(cfg):
        grid = build_grid(cfg, n)
        b = build_symbol(cfg, grid)
        family = build_family(cfg, grid)
        nb = bmo_norm(b, family)
        for wl, w in build_weights(cfg, grid, seed=cfg.integer("seed", 0)):
            mw, mrw = m_r_weight(w, 1.0), m_r_weight(w, r)
            for fl, f in build_functions(cfg, grid, w):
                tasks += [("linear", n, b, f, fl, w, wl, B, family, nb, mw, mrw) for B in family]
    if cfg.has("bilinear_kernel"):
        K2 = build_kernel(cfg, "bilinear_kernel")
        bp = cfg.section("bilinear")
        d2 = bp.number("delta", 1 / 3)
        mode = bp.string("mode", "difference_truncation")
        for n in [int(v) for v in bp.numbers("grids")]:
            grid = build_grid(cfg, n)
            b = build_symbol(cfg, grid)
            family = build_family(cfg, grid)
            nb = bmo_norm(b, family)
            (fl, f), = build_functions(cfg, grid)[:1]
            tasks += [("bilinear", n, b, f, fl, None, "1", B, family, nb, d2, mode)
                      for B in family]

    def row(task):
        kind, n, b, f, fl, w, wl, B, family, nb, *rest = task
        if kind == "linear":
            mw, mrw = rest
            rep = proof_decomposition_linear(b, K, f, B, delta, eps, r, w, family, trunc,
                                             bmo=nb, mw=mw, mrw=mrw)
        else:
            d2, mode = rest
            rep = modified_osc_multilinear(b, K2, f, f, B, d2, mode, trunc, family=family,
                                           oracle=False, bmo=nb)
        terms = {k: {"value": t.value, "bound": t.bound, "ratio": t.ratio}
                 for k, t in rep.terms.items()}
        return _ball_row(sid, B, rep.lhs, rep.rhs, rep.flags, f"{kind}|n={n}",
                         {"kind": kind, "n": n, "f": fl, "weight": wl, "terms": terms,
                          **{k: v for k, v in rep.extra.items() if k != "mode"}})

    rows = pmap(row, tasks, threads)
    metrics = {}
    for kind, names in (("linear", ("L11", "L12", "L21", "L22")),
                        ("bilinear", ("I1", "I21", "I22"))):
        sel = [r for r in rows if r.extra["kind"] == kind]
        if not sel:
            continue
        ns = sorted({r.extra["n"] for r in sel})
        for t in names:
            cs = [max(r.extra["terms"][t]["ratio"] for r in sel if r.extra["n"] == n) for n in ns]
            metrics[f"{t}_constants"] = cs
            metrics[f"{t}_spread"] = _spread(cs)
        metrics[f"{kind}_max_spread"] = max(metrics[f"{t}_spread"] for t in names)
        metrics[f"{kind}_all_finite"] = all(
            math.isfinite(tr["ratio"]) for r in sel for tr in r.extra["terms"].values())
    return _finish(cfg, "decompose", rows, metrics)


# ------------------------------------------------------------------ sharp maximal

def run_sharp_check(data: dict, threads: int = 1) -> Report:
    """``M_#,delta([b,T]f) / (g + M_T f ||b||_BMO)`` at equispaced probe samples."""
    validate(data)
    cfg = Cfg(data)
    sid = cfg.string("scenario_id")
    K = build_kernel(cfg)
    trunc = build_truncation(cfg)
    p = cfg.section("params")
    delta = p.number("delta", 0.5)
    a, z = p.numbers("probe_interval")
    count = p.integer("probes", 64)
    sizes = grid_sizes(cfg)

    def run(n):
        grid = build_grid(cfg, n)
        b = build_symbol(cfg, grid)
        family = build_family(cfg, grid)
        (fl, f), = build_functions(cfg, grid)[:1]
        prof = sharp_profile(b, K, f, delta, family, trunc)
        out = []
        for xp in np.linspace(a, z, count):
            i = grid.nearest(float(xp))
            rhs = float(prof.g[i] + prof.mt[i] * prof.bmo)
            out.append(RatioRow(sid, float(grid.x[i]), None, float(prof.lhs[i]), rhs,
                                prof.ratio(i), (), f"n={n}",
                                {"i": int(i), "g": float(prof.g[i]), "mt": float(prof.mt[i]),
                                 "bmo": prof.bmo}))
        return out

    rows = [r for chunk in pmap(run, sizes, threads) for r in chunk]
    cs = [max(r.ratio for r in rows if r.group == f"n={n}") for n in sizes]
    metrics = {"constants": cs, "rel_deviation": _rel_dev(cs),
               "all_finite": all(math.isfinite(r.ratio) for r in rows)}
    return _finish(cfg, "sharp", rows, metrics)


RUNNERS = {
    "osc-sweep": run_osc_sweep,
    "hst-contrast": run_hst_contrast,
    "bmo": run_bmo,
    "constants": run_constants,
    "endpoint": run_endpoint_orlicz,
    "extrapolate": run_extrapolation_check,
    "grand-maximal": run_grand_maximal_domination,
    "opnorm": run_opnorm,
    "decompose": run_decomposition,
    "sharp": run_sharp_check,
}


def run_suite(data: dict, threads: int = 1) -> Report:
    suite = Cfg(data).string("suite")
    if suite not in RUNNERS:
        raise ConfigError("suite", f"unknown suite {suite!r}")
    return RUNNERS[suite](data, threads)
