"""Scenario configuration: JSON in, module inputs out.

Every lookup goes through :class:`Cfg`, which remembers its dotted path so a
missing or malformed entry raises ``ConfigError`` naming the field
(``grid.n``, ``functions[1].name``, ...).
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from ..grid import (CLIP_TO_DOMAIN, MARGIN_RULES, REQUIRE_2B_INSIDE, Ball, BallFamily,
                    EmptyFamilyError, Grid, GridFn, dyadic_family, interval_family)
from ..kernels import BilinearKernelSpec, KernelSpec, TruncationRule, kernel_by_name
from ..weights import Weight, WeightFamilySpec

_MISSING = object()


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class Cfg:
    """Read-only view of a JSON object with path-aware errors."""

    def __init__(self, data, path: str = ""):
        self.data = data
        self.path = path

    def _sub(self, key) -> str:
        if isinstance(key, int):
            return f"{self.path}[{key}]"
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return isinstance(self.data, dict) and key in self.data

    def get(self, key, default=_MISSING):
        if isinstance(self.data, dict) and key in self.data:
            v = self.data[key]
        elif default is not _MISSING:
            return default
        else:
            raise ConfigError(self._sub(key), "missing required field")
        return Cfg(v, self._sub(key)) if isinstance(v, (dict, list)) else v

    def number(self, key, default=_MISSING) -> float:
        v = self.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(self._sub(key), f"expected a finite number, got {v!r}")
        return float(v)

    def integer(self, key, default=_MISSING) -> int:
        v = self.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._sub(key), f"expected an integer, got {v!r}")
        return v

    def string(self, key, default=_MISSING) -> str:
        v = self.get(key, default)
        if not isinstance(v, str):
            raise ConfigError(self._sub(key), f"expected a string, got {v!r}")
        return v

    def numbers(self, key, default=_MISSING) -> list[float]:
        v = self.get(key, default)
        items = v.data if isinstance(v, Cfg) else v
        if not isinstance(items, list) or not items:
            raise ConfigError(self._sub(key), "expected a nonempty list of numbers")
        out = []
        for i, x in enumerate(items):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(f"{self._sub(key)}[{i}]", f"expected a number, got {x!r}")
            out.append(float(x))
        return out

    def items(self, key) -> list["Cfg"]:
        v = self.get(key)
        if not isinstance(v, Cfg) or not isinstance(v.data, list):
            raise ConfigError(self._sub(key), "expected a list")
        return [Cfg(x, f"{v.path}[{i}]") for i, x in enumerate(v.data)]

    def section(self, key) -> "Cfg":
        v = self.get(key, {})
        if isinstance(v, Cfg) and isinstance(v.data, dict):
            return v
        if v == {}:
            return Cfg({}, self._sub(key))
        raise ConfigError(self._sub(key), "expected an object")


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    return data


def read_config(path) -> dict:
    data = load_json(path)
    validate(data)
    return data


def config_hash(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ------------------------------------------------------------------ builders

def build_grid(cfg: Cfg, n: int | None = None) -> Grid:
    g = cfg.section("grid")
    left = g.number("left")
    right = g.number("right")
    size = g.integer("n") if n is None else n
    try:
        return Grid(left, right, size)
    except ValueError as exc:
        raise ConfigError(g.path or "grid", str(exc)) from exc


def grid_sizes(cfg: Cfg) -> list[int]:
    if cfg.has("grids"):
        sizes = cfg.get("grids")
        vals = sizes.data if isinstance(sizes, Cfg) else sizes
        if not isinstance(vals, list) or not vals or not all(isinstance(v, int) for v in vals):
            raise ConfigError("grids", "expected a nonempty list of integers")
        return vals
    return [cfg.section("grid").integer("n")]


def build_kernel(cfg: Cfg, key: str = "kernel", default: str = "hilbert"):
    name = cfg.string(key, default)
    try:
        return kernel_by_name(name)
    except KeyError as exc:
        raise ConfigError(key, f"unknown kernel {name!r}") from exc


def build_truncation(cfg: Cfg) -> TruncationRule:
    p = cfg.section("params")
    eps = p.get("truncation_epsilon", None)
    return TruncationRule(None if eps is None else p.number("truncation_epsilon"))


def _abs_floor(grid: Grid) -> np.ndarray:
    return np.maximum(np.abs(grid.x), grid.h / 2)


def build_symbol(cfg: Cfg, grid: Grid, key: str = "symbol") -> GridFn:
    s = cfg.section(key)
    name = s.string("name")
    x = grid.x
    if name == "log_abs":
        return GridFn(grid, np.log(_abs_floor(grid)))
    if name == "log_abs_squared":
        return GridFn(grid, np.log(_abs_floor(grid)) ** 2)
    if name == "sgn":
        return GridFn(grid, np.sign(x))
    if name == "constant":
        return GridFn(grid, np.full(grid.n, s.number("value", 1.0)))
    if name == "custom":
        vals = s.numbers("samples")
        if len(vals) != grid.n:
            raise ConfigError(f"{s.path}.samples", f"expected {grid.n} samples, got {len(vals)}")
        return GridFn(grid, vals)
    raise ConfigError(f"{s.path}.name", f"unknown symbol {name!r}")


def build_weight_spec(c: Cfg) -> WeightFamilySpec:
    kind = c.string("kind")
    try:
        if kind == "power":
            return WeightFamilySpec("power", a=c.number("a"))
        if kind == "constant":
            return WeightFamilySpec("constant", value=c.number("value", 1.0))
        if kind == "product_of_powers":
            return WeightFamilySpec("product_of_powers", exponents=tuple(c.numbers("exponents")),
                                    points=tuple(c.numbers("points")))
        if kind == "perturbed_power":
            return WeightFamilySpec("perturbed_power", a=c.number("a"),
                                    amplitude=c.number("amplitude"),
                                    frequency=c.number("frequency", 1.0))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(c.path, str(exc)) from exc
    raise ConfigError(f"{c.path}.kind", f"unknown weight kind {kind!r}")


def weight_label(spec: WeightFamilySpec) -> str:
    if spec.kind == "power":
        return f"power({spec.a:g})"
    if spec.kind == "constant":
        return f"constant({spec.value:g})"
    if spec.kind == "perturbed_power":
        return f"perturbed_power({spec.a:g},{spec.amplitude:g},{spec.frequency:g})"
    return "product_of_powers(" + ",".join(f"{e:g}@{p:g}" for e, p in
                                           zip(spec.exponents, spec.points)) + ")"


def build_weights(cfg: Cfg, grid: Grid, key: str = "weights", seed: int = 0):
    """List of ``(label, Weight)``; each weight gets its own seeded stream."""
    out = []
    for i, c in enumerate(cfg.items(key)):
        spec = build_weight_spec(c)
        out.append((weight_label(spec), spec.build(grid, seed + i)))
    return out


def build_function(c: Cfg, grid: Grid, weight: Weight | None = None) -> tuple[str, GridFn]:
    name = c.string("name")
    x = grid.x
    if name == "indicator":
        lo, hi = c.number("a"), c.number("b")
        return f"indicator[{lo:g},{hi:g}]", GridFn(grid, ((x >= lo) & (x <= hi)).astype(float))
    if name == "zero":
        return "zero", GridFn(grid, np.zeros(grid.n))
    if name == "cosine":
        k = c.number("frequency", 1.0)
        return f"cosine({k:g})", GridFn(grid, np.cos(k * x))
    if name == "weight_cosine":
        k = c.number("frequency", 1.0)
        w = np.ones(grid.n) if weight is None else weight.values
        return f"weight_cosine({k:g})", GridFn(grid, w * np.cos(k * x))
    if name == "custom":
        vals = c.numbers("samples")
        if len(vals) != grid.n:
            raise ConfigError(f"{c.path}.samples", f"expected {grid.n} samples, got {len(vals)}")
        return c.string("label", "custom"), GridFn(grid, vals)
    raise ConfigError(f"{c.path}.name", f"unknown function {name!r}")


def build_functions(cfg: Cfg, grid: Grid, weight: Weight | None = None, key: str = "functions"):
    return [build_function(c, grid, weight) for c in cfg.items(key)]


def build_family(cfg: Cfg, grid: Grid, key: str = "balls") -> BallFamily:
    s = cfg.section(key)
    kind = s.string("kind")
    rule = s.string("rule", REQUIRE_2B_INSIDE)
    if rule not in MARGIN_RULES:
        raise ConfigError(f"{s.path}.rule", f"unknown margin rule {rule!r}")
    try:
        if kind == "dyadic":
            centers = s.get("centers")
            if isinstance(centers, Cfg):
                centers = s.numbers("centers")
            elif isinstance(centers, bool) or not isinstance(centers, int):
                raise ConfigError(f"{s.path}.centers", "expected an integer or a list of numbers")
            r_min = s.number("r_min") if s.has("r_min") else None
            return dyadic_family(grid, centers, s.integer("scales"), rule, r_min)
        if kind == "scaled":
            anchor = s.number("anchor", 0.0)
            offsets = s.numbers("offsets")
            r_min = s.number("r_min")
            balls = [Ball(anchor + t * r_min * 2.0 ** k, r_min * 2.0 ** k)
                     for k in range(s.integer("scales")) for t in offsets]
            return _filtered(grid, balls, rule)
        if kind == "explicit":
            pairs = s.items("balls")
            balls = []
            for p in pairs:
                if not isinstance(p.data, list) or len(p.data) != 2:
                    raise ConfigError(p.path, "expected [center, radius]")
                balls.append(Ball(float(p.data[0]), float(p.data[1])))
            return _filtered(grid, balls, rule)
        if kind == "intervals":
            return interval_family(grid, s.integer("stride", 1), s.integer("min_samples", 1),
                                   s.string("rule", CLIP_TO_DOMAIN))
    except EmptyFamilyError as exc:
        raise ConfigError(s.path or key, "empty family") from exc
    raise ConfigError(f"{s.path}.kind", f"unknown ball family kind {kind!r}")


def _filtered(grid, balls, rule):
    kept = []
    for B in balls:
        lo, hi = grid.span(B)
        if hi <= lo:
            continue
        if rule == REQUIRE_2B_INSIDE and not grid.contains(B.dilate(2.0)):
            continue
        kept.append(B)
    return BallFamily(tuple(kept), rule)


SUITES = ("osc-sweep", "hst-contrast", "bmo", "constants", "endpoint", "extrapolate",
          "grand-maximal", "opnorm", "decompose", "sharp")


def validate(data: dict) -> None:
    """Build every object the config names on its first grid; raises ``ConfigError``."""
    cfg = Cfg(data)
    suite = cfg.string("suite")
    if suite not in SUITES:
        raise ConfigError("suite", f"unknown suite {suite!r}")
    cfg.string("scenario_id")
    grid = build_grid(cfg, grid_sizes(cfg)[0])
    if cfg.has("kernel"):
        build_kernel(cfg)
    if cfg.has("bilinear_kernel"):
        build_kernel(cfg, "bilinear_kernel")
    if cfg.has("symbol"):
        build_symbol(cfg, grid)
    weights = build_weights(cfg, grid) if cfg.has("weights") else []
    if cfg.has("functions"):
        build_functions(cfg, grid, weights[0][1] if weights else None)
    if cfg.has("balls"):
        build_family(cfg, grid)
    if cfg.has("seed"):
        cfg.integer("seed")
