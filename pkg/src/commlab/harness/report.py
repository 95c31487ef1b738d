"""Ratio rows, reports and their JSON/CSV persistence.

A report's summary is a pure function of its rows (:func:`summarize`), so a
reader can recompute it and compare exactly.  JSON output uses a fixed key
order and Python's shortest round-trip float repr; no timestamp is written,
which keeps two runs of the same config byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__

CSV_HEADER = ("scenario_id", "ball_center", "ball_radius", "lhs", "rhs", "ratio", "flags")
EXCLUDED_FLAGS = ("degenerate", "zero_norm")


@dataclass
class RatioRow:
    scenario_id: str
    ball_center: float | None
    ball_radius: float | None
    lhs: float
    rhs: float
    ratio: float
    flags: tuple = ()
    group: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"scenario_id": self.scenario_id, "ball_center": self.ball_center,
                "ball_radius": self.ball_radius, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "flags": list(self.flags), "group": self.group,
                "extra": self.extra}

    @classmethod
    def from_dict(cls, d: dict) -> "RatioRow":
        return cls(d["scenario_id"], d["ball_center"], d["ball_radius"], d["lhs"], d["rhs"],
                   d["ratio"], tuple(d["flags"]), d.get("group", ""), d.get("extra", {}))

    @property
    def counted(self) -> bool:
        return not any(fl in EXCLUDED_FLAGS for fl in self.flags)


def trend_slope(radii, ratios) -> float | None:
    """Least-squares slope of log(ratio) against log(radius); None if undefined."""
    pts = [(math.log(r), math.log(q)) for r, q in zip(radii, ratios)
           if r is not None and r > 0 and q > 0 and math.isfinite(q)]
    if len(pts) < 2 or len({p[0] for p in pts}) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _stats(rows: list[RatioRow]) -> dict:
    use = [r for r in rows if r.counted]
    if not use:
        return {"count": 0, "max_ratio": 0.0, "median_ratio": 0.0, "argmax_ball": None,
                "trend_slope": None, "all_finite": True}
    ratios = [r.ratio for r in use]
    k = int(np.argmax(ratios))
    return {"count": len(use), "max_ratio": float(ratios[k]),
            "median_ratio": float(np.median(ratios)),
            "argmax_ball": [use[k].ball_center, use[k].ball_radius],
            "trend_slope": trend_slope([r.ball_radius for r in use], ratios),
            "all_finite": bool(all(math.isfinite(q) for q in ratios))}


def summarize(rows: list[RatioRow]) -> dict:
    """Pooled statistics plus the same statistics per row group, and flag counts."""
    out = _stats(rows)
    flags: dict[str, int] = {}
    for r in rows:
        for fl in r.flags:
            flags[fl] = flags.get(fl, 0) + 1
    out["flags"] = dict(sorted(flags.items()))
    groups = sorted({r.group for r in rows if r.group})
    out["groups"] = {g: _stats([r for r in rows if r.group == g]) for g in groups}
    return out


@dataclass
class Check:
    name: str
    value: float | None
    threshold: str
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "passed": self.passed}


@dataclass
class Report:
    scenario_id: str
    suite: str
    config: dict
    rows: list[RatioRow]
    summary: dict
    checks: list[Check] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"scenario_id": self.scenario_id, "suite": self.suite,
                "versions": self.versions, "config": self.config,
                "summary": self.summary, "metrics": self.metrics,
                "checks": [c.to_dict() for c in self.checks],
                "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["scenario_id"], d["suite"], d["config"],
                   [RatioRow.from_dict(r) for r in d["rows"]], d["summary"],
                   [Check(**c) for c in d.get("checks", [])], d.get("metrics", {}),
                   d.get("versions", {}))


def make_report(scenario_id, suite, config, rows, checks=(), metrics=None) -> Report:
    from .config import config_hash
    versions = {"code": __version__, "config_sha256": config_hash(config)}
    return Report(scenario_id, suite, config, list(rows), summarize(list(rows)),
                  list(checks), dict(metrics or {}), versions)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def report_json(report: Report) -> str:
    return json.dumps(_clean(report.to_dict()), indent=2, allow_nan=False) + "\n"


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in report.rows:
        wr.writerow([r.scenario_id, _fmt(r.ball_center), _fmt(r.ball_radius), _fmt(r.lhs),
                     _fmt(r.rhs), _fmt(r.ratio), ";".join(r.flags)])
    return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_report(report: Report, path, fmt: str = "json") -> None:
    text = report_json(report) if fmt == "json" else report_csv(report)
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(text)


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def read_report(path) -> Report:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    d = _restore(data)
    d["config"] = data["config"]
    return Report.from_dict(d)
