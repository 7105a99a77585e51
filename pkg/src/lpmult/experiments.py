"""Config-driven experiments and their reports.

A config is a JSON object (schema version 1).  ``run`` validates it fully
before computing anything and returns a :class:`Report` whose cells are flat
records.  Wall times are kept out of the csv/json payload so that equal
configs give byte-identical files; ``emit`` writes them to a sidecar.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic_models import (AnalyticModel, NotBoundedError, PoleSum, SingularInner,
                              is_bounded_on, model_from_record, offending_singularities)
from .circle_geometry import ClosedCircleSet, GeometryError, build_star_domain
from .littlewood_paley import lp_constants_estimate, partition_from_set
from .lp_sets import GENERATORS, MAX_SUPERLACUNARY_K
from .mikhlin import mikhlin_constant
from .multiplier_norms import multiplier_norm_curve
from .taylor import taylor

SCHEMA_VERSION = 1
KINDS = ("theorem_probe", "verbitskii_probe", "mikhlin_verify", "lp_constants", "norm_table")
OUTPUT_DIR_ENV = "LPMULT_OUTPUT_DIR"
DEFAULT_DELTAS = (0.05, 0.02, 0.01)

CSV_FIELDS = ("cell", "p", "N", "lower", "upper", "sup_product", "bound", "margin", "grid",
              "trials", "ratio_min", "ratio_max", "iterations", "seed", "methods")

DEFAULTS = {
    "grids": {"mikhlin": 20000, "sup_norm": 8192, "inscribed_samples": 64},
    "tolerances": {"boyd_tol": 1e-8, "restarts": 8, "max_iter": 500},
    "trials": 500,
    "seed": 0,
    "deltas": list(DEFAULT_DELTAS),
}

# keys each kind needs on top of "kind"
REQUIRED = {
    "theorem_probe": ("set", "theta0", "p_list", "N_list"),
    "verbitskii_probe": ("p_list", "N_list"),
    "mikhlin_verify": ("set", "theta0"),
    "lp_constants": ("set", "p_list", "N_list"),
    "norm_table": ("model", "p_list", "N_list"),
}
KNOWN_KEYS = {"schema_version", "kind", "name", "set", "theta0", "model", "p_list", "N_list",
              "grids", "tolerances", "trials", "seed", "deltas"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return (isinstance(x, (int, float)) and not isinstance(x, bool)) and math.isfinite(x)


def parse_p(value) -> float:
    if value in ("inf", "infinity"):
        return math.inf
    if not _is_real(value):
        raise ValueError(f"not a real number: {value!r}")
    return float(value)


def _check_set(entry) -> ClosedCircleSet:
    if not isinstance(entry, dict):
        raise ConfigError("set", "must be an object")
    if "generator" in entry:
        gen = entry["generator"]
        if gen not in GENERATORS:
            raise ConfigError("set.generator", f"unknown generator {gen!r}")
        K = entry.get("K")
        if not _is_int(K) or K < 1:
            raise ConfigError("set.K", "must be an integer >= 1")
        if gen == "superlacunary" and K > MAX_SUPERLACUNARY_K:
            raise ConfigError("set.K", f"superlacunary K must be <= {MAX_SUPERLACUNARY_K}")
        return GENERATORS[gen](K)
    if "angles" in entry:
        angles = entry["angles"]
        if not isinstance(angles, list) or not all(_is_real(a) for a in angles):
            raise ConfigError("set.angles", "must be a list of real numbers")
        acc = entry.get("accumulation", [])
        if not isinstance(acc, list) or not all(_is_real(a) for a in acc):
            raise ConfigError("set.accumulation", "must be a list of real numbers")
        try:
            return ClosedCircleSet.from_angles(angles, acc)
        except GeometryError as exc:
            raise ConfigError("set.angles", str(exc)) from None
    raise ConfigError("set", "needs either 'generator' or 'angles'")


def _check_positive_ints(name, values, minimum):
    if not isinstance(values, list) or not values:
        raise ConfigError(name, "must be a nonempty list")
    for v in values:
        if not _is_int(v) or v < minimum:
            raise ConfigError(name, f"entries must be integers >= {minimum}, got {v!r}")
    if len(set(values)) != len(values):
        raise ConfigError(name, "entries must be distinct")


@dataclass
class ExperimentConfig:
    """Validated experiment configuration (see README for the schema)."""

    kind: str
    raw: dict
    name: str = ""
    cset: ClosedCircleSet | None = None
    theta0: float | None = None
    model: AnalyticModel | None = None
    p_list: list = field(default_factory=list)
    N_list: list = field(default_factory=list)
    grids: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    trials: int = 500
    seed: int = 0
    deltas: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, raw: dict, seed_override: int | None = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config", "must be a JSON object")
        unknown = sorted(set(raw) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        if raw.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"only version {SCHEMA_VERSION} is supported")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        for key in REQUIRED[kind]:
            if key not in raw:
                raise ConfigError(key, f"required for kind {kind}")
        name = raw.get("name", kind)
        if not isinstance(name, str) or not name or any(c in name for c in "/\\\0"):
            raise ConfigError("name", "must be a nonempty string usable as a file stem")

        cfg = cls(kind=kind, raw=raw, name=name)
        if "set" in raw:
            cfg.cset = _check_set(raw["set"])
        if "theta0" in raw:
            th = raw["theta0"]
            if not _is_real(th) or not 0.0 < th < math.pi / 2:
                raise ConfigError("theta0", "must be a real number in (0, pi/2)")
            cfg.theta0 = float(th)
        if "model" in raw and raw["model"] is not None:
            if not isinstance(raw["model"], dict):
                raise ConfigError("model", "must be a model record object")
            try:
                cfg.model = model_from_record(raw["model"])
            except (KeyError, TypeError, ValueError, AttributeError, IndexError) as exc:
                raise ConfigError("model", f"invalid model record ({exc})") from None
        if "p_list" in raw:
            pl = raw["p_list"]
            if not isinstance(pl, list) or not pl:
                raise ConfigError("p_list", "must be a nonempty list")
            try:
                cfg.p_list = [parse_p(p) for p in pl]
            except ValueError as exc:
                raise ConfigError("p_list", str(exc)) from None
            lo = 1.0 if kind in ("theorem_probe", "verbitskii_probe", "norm_table") else None
            for p in cfg.p_list:
                if lo is not None and p < lo:
                    raise ConfigError("p_list", f"entries must be >= 1, got {p!r}")
                if lo is None and not 1.0 < p < math.inf:
                    raise ConfigError("p_list", f"entries must lie in (1, inf), got {p!r}")
            if len(set(cfg.p_list)) != len(cfg.p_list):
                raise ConfigError("p_list", "entries must be distinct")
        if "N_list" in raw:
            if kind == "lp_constants":
                _check_positive_ints("N_list", raw["N_list"], 8)
                if any(n & (n - 1) for n in raw["N_list"]):
                    raise ConfigError("N_list", "entries must be powers of two")
            else:
                _check_positive_ints("N_list", raw["N_list"], 2)
            cfg.N_list = sorted(raw["N_list"])
            if kind == "lp_constants" and cfg.cset is not None:
                for n in cfg.N_list:
                    try:
                        partition_from_set(cfg.cset, n)
                    except ValueError as exc:
                        raise ConfigError("N_list", str(exc)) from None

        grids = dict(DEFAULTS["grids"])
        g = raw.get("grids", {})
        if not isinstance(g, dict):
            raise ConfigError("grids", "must be an object")
        for key, val in g.items():
            if key not in grids:
                raise ConfigError(f"grids.{key}", "unknown grid")
            floor = {"mikhlin": 1024, "sup_norm": 16, "inscribed_samples": 64}[key]
            if not _is_int(val) or val < floor:
                raise ConfigError(f"grids.{key}", f"must be an integer >= {floor}")
            grids[key] = val
        cfg.grids = grids

        tols = dict(DEFAULTS["tolerances"])
        t = raw.get("tolerances", {})
        if not isinstance(t, dict):
            raise ConfigError("tolerances", "must be an object")
        for key, val in t.items():
            if key not in tols:
                raise ConfigError(f"tolerances.{key}", "unknown tolerance")
            if key == "boyd_tol":
                if not _is_real(val) or not 0 < val < 1:
                    raise ConfigError("tolerances.boyd_tol", "must be a real number in (0, 1)")
            elif not _is_int(val) or val < 1:
                raise ConfigError(f"tolerances.{key}", "must be a positive integer")
            tols[key] = val
        cfg.tolerances = tols

        trials = raw.get("trials", DEFAULTS["trials"])
        if not _is_int(trials) or trials < 100:
            raise ConfigError("trials", "must be an integer >= 100")
        cfg.trials = trials

        seed = raw.get("seed", DEFAULTS["seed"])
        if not _is_int(seed) or seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")
        cfg.seed = seed if seed_override is None else seed_override

        deltas = raw.get("deltas", DEFAULTS["deltas"])
        if (not isinstance(deltas, list) or not deltas
                or not all(_is_real(d) and 0 < d < 1 for d in deltas)):
            raise ConfigError("deltas", "must be a nonempty list of reals in (0, 1)")
        cfg.deltas = [float(d) for d in deltas]

        if kind == "verbitskii_probe" and cfg.model is not None \
                and not isinstance(cfg.model, SingularInner):
            raise ConfigError("model", "verbitskii_probe always uses the singular inner function")
        return cfg

    def echo(self) -> dict:
        out = dict(self.raw)
        out["seed"] = self.seed
        out.setdefault("schema_version", SCHEMA_VERSION)
        return out


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON ({exc})") from None
    return ExperimentConfig.from_dict(raw, seed_override)


def place_poles(cset: ClosedCircleSet, deltas=DEFAULT_DELTAS) -> PoleSum:
    """Poles ``(1 + d) e^{is}`` with weight ``d`` radially outside flagged set points.

    Falls back to every point of the set when none is flagged.  The rays
    leave the disk at a vertex shared by two triangles, outside both.
    """
    angles = cset.accumulation or cset.points
    poles, weights = [], []
    for s in angles:
        for d in deltas:
            poles.append((1.0 + d) * np.exp(1j * s))
            weights.append(d)
    return PoleSum(poles, weights)


@dataclass
class Report:
    config: dict
    cells: list
    summary: dict = field(default_factory=dict)
    version: str = __version__
    platform: str = ""
    timings: list = field(default_factory=list, compare=False)

    def to_record(self) -> dict:
        # JSON-native: non-finite floats become strings, tuples become lists
        return _jsonable({"version": self.version, "platform": self.platform,
                          "config": self.config, "summary": self.summary, "cells": self.cells})

    @classmethod
    def from_record(cls, record: dict) -> "Report":
        return cls(config=record["config"], cells=record["cells"],
                   summary=record.get("summary", {}), version=record["version"],
                   platform=record.get("platform", ""))


def platform_note() -> str:
    return (f"{platform.system()}-{platform.machine()} python {platform.python_version()} "
            f"numpy {np.__version__}")


def _curve_job(args):
    model, p, N_list, seed, tol, coeffs = args
    start = time.perf_counter()
    curve = multiplier_norm_curve(model, p, N_list, seed, tol["boyd_tol"], tol["restarts"],
                                  tol["max_iter"], coeffs)
    return p, [est.to_record() for est in curve], time.perf_counter() - start


def _norm_cells(model, cfg: ExperimentConfig, timings: list, workers: int = 1) -> list:
    # one job per p: the curve over N is sequential because of warm starts
    coeffs = taylor(model, max(cfg.N_list))
    jobs = [(model, p, cfg.N_list, cfg.seed, cfg.tolerances, coeffs) for p in cfg.p_list]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_curve_job, jobs))
    else:
        results = [_curve_job(job) for job in jobs]
    cells = []
    for p, records, elapsed in results:
        for rec in records:
            cells.append({"cell": "norm", **rec})
            timings.append({"cell": "norm", "p": p, "N": rec["N"],
                            "wall_time": elapsed / len(records)})
    cells.sort(key=lambda c: (c["p"], c["N"], c["seed"]))
    return cells


def _curve_summary(cells: list) -> dict:
    out = {}
    for p in sorted({c["p"] for c in cells if c["cell"] == "norm"}):
        curve = sorted((c for c in cells if c["cell"] == "norm" and c["p"] == p),
                       key=lambda c: c["N"])
        lows = [c["lower"] for c in curve]
        entry = {"lower_curve": lows,
                 "nondecreasing": all(b >= a - 1e-9 for a, b in zip(lows, lows[1:]))}
        if len(lows) >= 2:
            entry["last_over_penultimate"] = lows[-1] / lows[-2]
            entry["last_over_first"] = lows[-1] / lows[0]
        out[_p_key(p)] = entry
    return out


def _p_key(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


def _mikhlin_cell(model, domain, cfg: ExperimentConfig, timings: list) -> dict:
    start = time.perf_counter()
    rep = mikhlin_constant(model, domain, cfg.grids["mikhlin"], sup_grid=cfg.grids["sup_norm"],
                           samples=cfg.grids["inscribed_samples"])
    timings.append({"cell": "mikhlin", "wall_time": time.perf_counter() - start})
    return {"cell": "mikhlin", **rep.to_record(), "seed": cfg.seed,
            "methods": {"derivative": "closed_form", "sup_norm": "boundary_sampling",
                        "inscribed_constant": "bisection"}}


def run(cfg: ExperimentConfig, workers: int = 1) -> Report:
    """Execute one experiment; see README for what each kind produces.

    ``workers > 1`` runs the per-p norm curves in a process pool.  Cells are
    sorted by ``(p, N, seed)`` so the report does not depend on completion order.
    """
    timings: list = []
    cells: list = []
    summary: dict = {"kind": cfg.kind}

    if cfg.kind in ("theorem_probe", "mikhlin_verify"):
        domain = build_star_domain(cfg.cset, cfg.theta0)
        model = cfg.model if cfg.model is not None else place_poles(cfg.cset, cfg.deltas)
        if not is_bounded_on(model, domain):
            bad = offending_singularities(model, domain)
            raise NotBoundedError(
                f"model is not bounded on the star domain; offending singularities: {bad}")
        summary["domain"] = {"theta_min": domain.theta_min,
                             "points": len(cfg.cset.points),
                             "inscribed_constant": domain.inscribed_constant(
                                 cfg.grids["inscribed_samples"])}
        summary["model"] = model.to_record()
        mk = _mikhlin_cell(model, domain, cfg, timings)
        cells.append(mk)
        summary["mikhlin_margin"] = mk["margin"]
        if cfg.kind == "theorem_probe":
            cells.extend(_norm_cells(model, cfg, timings, workers))
            summary["curves"] = _curve_summary(cells)
    elif cfg.kind == "verbitskii_probe":
        model = SingularInner()
        summary["model"] = model.to_record()
        cells.extend(_norm_cells(model, cfg, timings, workers))
        summary["curves"] = _curve_summary(cells)
    elif cfg.kind == "norm_table":
        summary["model"] = cfg.model.to_record()
        cells.extend(_norm_cells(cfg.model, cfg, timings, workers))
        summary["curves"] = _curve_summary(cells)
    elif cfg.kind == "lp_constants":
        for N in cfg.N_list:
            partition = partition_from_set(cfg.cset, N)
            for p in cfg.p_list:
                start = time.perf_counter()
                rep = lp_constants_estimate(partition, p, cfg.trials, cfg.seed)
                timings.append({"cell": "lp_constants", "p": p, "N": N,
                                "wall_time": time.perf_counter() - start})
                cells.append({"cell": "lp_constants", **rep.to_record(),
                              "methods": {"vectors": "gaussian+adversarial",
                                          "measure": "normalized_counting"}})
    return Report(cfg.echo(), cells, summary, __version__, platform_note(), timings)


# ------------------------------------------------------------------ output

def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def report_json(report: Report) -> str:
    return json.dumps(_jsonable(report.to_record()), indent=2, sort_keys=True) + "\n"


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, dict):
        return ";".join(f"{k}={v[k]}" for k in sorted(v))
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_FIELDS)
    for cell in report.cells:
        writer.writerow([_csv_value(cell.get(k)) for k in CSV_FIELDS])
    return buf.getvalue()


def output_dir(explicit=None) -> Path:
    return Path(explicit or os.environ.get(OUTPUT_DIR_ENV, "lpmult-output"))


def emit(report: Report, fmt: str, out_dir=None, stem: str | None = None) -> Path:
    """Write the report as ``csv``, ``json`` or ``svg``; returns the file path."""
    out = output_dir(out_dir)
    stem = stem or report.config.get("name") or report.config.get("kind", "report")
    try:
        out.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            path = out / f"{stem}.csv"
            path.write_bytes(report_csv(report).encode())
        elif fmt == "json":
            path = out / f"{stem}.json"
            path.write_bytes(report_json(report).encode())
        elif fmt == "svg":
            from .plotting import plot_report
            path = plot_report(report, out / f"{stem}.svg")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        if report.timings:
            (out / f"{stem}.timings.json").write_text(
                json.dumps(_jsonable(report.timings), indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return path


def read_report(path) -> Report:
    with open(path) as fh:
        return Report.from_record(json.load(fh))
