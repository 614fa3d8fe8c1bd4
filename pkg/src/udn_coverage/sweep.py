"""Density sweeps written as CSV, plus the YAML experiment manifest they are read from.

Densities cross this boundary in BS (or UE) per km^2 and the threshold in dB;
everything past it is SI and linear.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import analysis, montecarlo
from .analysis import NetworkScenario
from .montecarlo import LoadMode, SimConfig
from .pathloss import PathLossModel, Variant
from .specfun import DEFAULT_QUADRATURE, ConvergenceError

log = logging.getLogger(__name__)

KM2 = 1e6
FULL_LOAD_TOKENS = ("full", "inf", "full-load")
COLUMNS = (
    "lambda_b_per_km2",
    "lambda_u_per_km2",
    "model",
    "method",
    "p_active",
    "coverage",
    "coverage_ci_halfwidth",
    "ase_bps_hz_km2",
    "runtime_ms",
)
METHODS = ("exact", "bounds", "asymptotic", "general", "montecarlo")
_CLOSED_FORM_METHODS = ("exact", "bounds", "asymptotic")


class SweepError(RuntimeError):
    """A grid point failed; ``point`` names it and ``__cause__`` holds the original error."""

    def __init__(self, point: str, cause: BaseException):
        super().__init__(f"{point}: {type(cause).__name__}: {cause}")
        self.point = point
        self.cause = cause


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def per_m2(per_km2: float) -> float:
    return per_km2 / KM2


def parse_lambda_u(value: Any) -> float:
    """UE density in per km^2, accepting ``full`` for the full-load sentinel."""
    if isinstance(value, str):
        if value.strip().lower() in FULL_LOAD_TOKENS:
            return math.inf
        value = float(value)
    value = float(value)
    if math.isnan(value) or value < 0:
        raise ValueError(f"UE density must be >= 0, got {value!r}")
    return value


@dataclass
class SweepSpec:
    """One experiment: a density grid, the models and methods to evaluate, and where to write.

    ``points`` optionally replaces the ``lambda_b_grid x lambda_u_list``
    product with explicit ``(lambda_b, lambda_u)`` pairs (per km^2).
    """

    lambda_b_grid: list[float]
    lambda_u_list: list[float]
    model_set: list[PathLossModel] = field(default_factory=lambda: [PathLossModel.reference()])
    T_db: float = 10.0
    methods: list[str] = field(default_factory=lambda: ["exact"])
    sim: SimConfig | None = None
    output_path: Path | None = None
    points: list[tuple[float, float]] | None = None
    workers: int = 1
    record_runtime: bool = False

    def validate(self) -> None:
        if self.points is None and (not self.lambda_b_grid or not self.lambda_u_list):
            raise ValueError("lambda_b_grid and lambda_u_list must be non-empty")
        if self.points is not None and not self.points:
            raise ValueError("points must be non-empty when given")
        if not self.model_set:
            raise ValueError("model_set must be non-empty")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if "montecarlo" in self.methods and self.sim is None:
            raise ValueError("montecarlo requested but no simulation settings given")
        if not math.isfinite(self.T_db):
            raise ValueError("T_db must be finite")
        for lb in self.grid_points():
            if not (lb[0] > 0 and math.isfinite(lb[0])):
                raise ValueError(f"BS density must be positive, got {lb[0]!r}")
            parse_lambda_u(lb[1])
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def grid_points(self) -> list[tuple[float, float]]:
        if self.points is not None:
            return [(float(b), parse_lambda_u(u)) for b, u in self.points]
        return [(float(b), parse_lambda_u(u)) for b in self.lambda_b_grid for u in self.lambda_u_list]

    @property
    def T(self) -> float:
        return db_to_linear(self.T_db)


@dataclass(frozen=True)
class _Task:
    lambda_b_km2: float
    lambda_u_km2: float
    model: PathLossModel
    method: str


def _tasks(spec: SweepSpec) -> list[_Task]:
    tasks = []
    for lb, lu in spec.grid_points():
        for model in spec.model_set:
            for method in spec.methods:
                if method in _CLOSED_FORM_METHODS and model.variant is not Variant.BOUNDED_DUAL_SLOPE:
                    log.info("skipping %s for %s: closed forms need BoundedDualSlope", method, model.variant.value)
                    continue
                tasks.append(_Task(lb, lu, model, method))
    return tasks


def _row(task, method_label, p_active, cov, half_width, ase_m2, runtime_ms):
    scenario_lb = per_m2(task.lambda_b_km2)
    lu = per_m2(task.lambda_u_km2)
    return {
        "lambda_b_per_km2": scenario_lb * KM2,
        "lambda_u_per_km2": lu * KM2,
        "model": task.model.variant.value,
        "method": method_label,
        "p_active": p_active,
        "coverage": cov,
        "coverage_ci_halfwidth": half_width,
        "ase_bps_hz_km2": ase_m2 * KM2,
        "runtime_ms": runtime_ms,
    }


def _evaluate(task: _Task, T: float, sim: SimConfig | None, record_runtime: bool) -> list[dict]:
    scenario = NetworkScenario(per_m2(task.lambda_b_km2), per_m2(task.lambda_u_km2), T)
    model = task.model
    start = time.perf_counter()
    pa = analysis.active_probability(scenario)
    if task.method == "montecarlo":
        est = montecarlo.estimate_coverage(model, scenario, sim)
        values = [("montecarlo", est.p_active, est.coverage.value, est.coverage.half_width, est.ase)]
    elif task.method == "bounds":
        lower, upper, _ = analysis.coverage_bounds(model, scenario)
        values = [
            ("bound_lower", pa, lower.value, None, analysis.ase_from_coverage(scenario, lower.value)),
            ("bound_upper", pa, upper.value, None, analysis.ase_from_coverage(scenario, upper.value)),
        ]
    else:
        method = {
            "exact": analysis.Method.EXACT,
            "general": analysis.Method.GENERAL,
            "asymptotic": analysis.Method.ASYMPTOTIC,
        }[task.method]
        cov = analysis.coverage(model, scenario, method).value
        values = [(task.method, pa, cov, None, analysis.ase_from_coverage(scenario, cov))]
    elapsed = (time.perf_counter() - start) * 1e3 if record_runtime else None
    return [_row(task, label, p, c, hw, a, elapsed) for label, p, c, hw, a in values]


def _evaluate_safely(task, T, sim, record_runtime):
    try:
        return _evaluate(task, T, sim, record_runtime)
    except Exception as exc:
        point = (
            f"lambda_b={task.lambda_b_km2!r}/km^2, lambda_u={task.lambda_u_km2!r}/km^2, "
            f"model={task.model.variant.value}, method={task.method}"
        )
        raise SweepError(point, exc) from exc


def _sort_key(row: dict):
    return (row["lambda_b_per_km2"], row["lambda_u_per_km2"], row["model"], row["method"])


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate every grid point and return rows sorted by their key columns.

    Rows are written to ``spec.output_path`` (with a ``.meta.txt`` sidecar)
    when it is set.
    """
    spec.validate()
    tasks = _tasks(spec)
    T = spec.T
    if spec.workers == 1:
        batches = [_evaluate_safely(t, T, spec.sim, spec.record_runtime) for t in tasks]
    else:
        # nested pools are not allowed; trials run serially inside each worker
        sim = replace(spec.sim, workers=1) if spec.sim is not None else None
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_evaluate_safely, t, T, sim, spec.record_runtime) for t in tasks]
            batches = [f.result() for f in futures]
    rows = sorted((r for batch in batches for r in batch), key=_sort_key)
    if spec.output_path is not None:
        write_csv(rows, spec.output_path)
        write_metadata(spec, rows, metadata_path(spec.output_path))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], path: Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rows_to_csv(rows), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def metadata_path(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.txt")


def run_metadata(spec: SweepSpec) -> dict:
    from . import __version__

    meta = {
        "package_version": __version__,
        "T_db": spec.T_db,
        "T_linear": spec.T,
        "methods": list(spec.methods),
        "models": [
            {"variant": m.variant.value, "R_b": m.R_b, "R_c": m.R_c, "alpha_c": m.alpha_c, "alpha": m.alpha}
            for m in spec.model_set
        ],
        "quadrature": {
            "rel_tol": DEFAULT_QUADRATURE.rel_tol,
            "abs_tol": DEFAULT_QUADRATURE.abs_tol,
            "max_subdivisions": DEFAULT_QUADRATURE.max_subdivisions,
        },
    }
    if spec.sim is not None:
        sim = spec.sim
        radii = {}
        for lb, _ in spec.grid_points():
            for m in spec.model_set:
                scenario = NetworkScenario(per_m2(lb), 0.0, spec.T)
                radii[f"{lb!r} {m.variant.value}"] = montecarlo.window_radius_for(m, scenario, sim)
        meta["simulation"] = {
            "master_seed": sim.master_seed,
            "trials": sim.trials,
            "load_mode": sim.load_mode.value,
            "window_radius": "auto" if sim.window_radius is None else sim.window_radius,
            "min_expected_bs": sim.min_expected_bs,
            "window_radius_m_by_point": radii,
            "generator": montecarlo.GENERATOR,
        }
    return meta


def write_metadata(spec: SweepSpec, rows: Sequence[dict], path: Path) -> None:
    meta = run_metadata(spec)
    meta["rows"] = len(rows)
    Path(path).write_text(yaml.safe_dump(meta, sort_keys=True), encoding="utf-8")


# -- manifest ---------------------------------------------------------------


def _grid(value) -> list[float]:
    if isinstance(value, dict):
        lo, hi, num = value["logspace"] if "logspace" in value else (value["start"], value["stop"], value["num"])
        return [float(x) for x in np.logspace(float(lo), float(hi), int(num))]
    if isinstance(value, (int, float, str)):
        return [float(value)]
    return [float(v) for v in value]


def _models(names, params: dict) -> list[PathLossModel]:
    params = {k: float(v) for k, v in (params or {}).items()}
    if isinstance(names, str):
        names = [names]
    return [PathLossModel(Variant(n), **params) for n in names]


def _sim_config(raw: dict | None) -> SimConfig | None:
    if raw is None:
        return None
    raw = dict(raw)
    if raw.get("window_radius") in ("auto", None):
        raw["window_radius"] = None
    return SimConfig(**raw)


def spec_from_mapping(data: dict) -> SweepSpec:
    """Build a :class:`SweepSpec` from a parsed manifest (see ``configs/*.yaml``)."""
    known = {
        "lambda_b_per_km2", "lambda_u_per_km2", "models", "path_loss", "T_db",
        "methods", "sim", "output", "points", "workers", "record_runtime",
    }
    extra = set(data) - known
    if extra:
        raise ValueError(f"unknown manifest keys: {sorted(extra)}")
    points = data.get("points")
    spec = SweepSpec(
        lambda_b_grid=_grid(data.get("lambda_b_per_km2", [])),
        lambda_u_list=[parse_lambda_u(u) for u in data.get("lambda_u_per_km2", [])],
        model_set=_models(data.get("models", ["BoundedDualSlope"]), data.get("path_loss")),
        T_db=float(data.get("T_db", 10.0)),
        methods=list(data.get("methods", ["exact"])),
        sim=_sim_config(data.get("sim")),
        output_path=Path(data["output"]) if data.get("output") else None,
        points=[(float(b), parse_lambda_u(u)) for b, u in points] if points else None,
        workers=int(data.get("workers", 1)),
        record_runtime=bool(data.get("record_runtime", False)),
    )
    return spec


def load_manifest(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: manifest must be a mapping")
    return data

