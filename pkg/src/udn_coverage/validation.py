"""Acceptance checks, runnable from the CLI (``validate``) and from pytest.

Each check returns a :class:`CriterionResult`; the report is one CSV line per
criterion with its id, status, measured value and tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import analysis, montecarlo
from .analysis import NetworkScenario
from .montecarlo import LoadMode, SimConfig
from .pathloss import PathLossModel, Variant
from .specfun import hyp_F
from .sweep import SweepSpec, per_m2, rows_to_csv, run_sweep

T_REF = 10.0  # 10 dB
LAMBDA_U_SET = (20.0, 200.0, 2000.0, math.inf)  # per km^2
GRID_LAMBDA_B = tuple(10.0 ** k for k in range(1, 7))  # per km^2
SIM_POINTS = (  # (lambda_b, lambda_u) per km^2
    (1e1, 20.0),
    (1e3, 20.0),
    (1e5, 20.0),
    (1e2, 200.0),
    (1e3, 200.0),
    (1e4, 200.0),
    (1e4, 2000.0),
    (1e2, math.inf),
)
SIM_TRIALS = 20_000
SIM_SEED = 20170101


@dataclass
class CriterionResult:
    id: str
    description: str
    passed: bool
    measured: float
    tolerance: str
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.id},{self.status},{self.measured!r},{self.tolerance},{self.description}"


def reference_model(variant: Variant | str = Variant.BOUNDED_DUAL_SLOPE) -> PathLossModel:
    return PathLossModel.reference(variant)


def scenario(lambda_b_km2: float, lambda_u_km2: float, T: float = T_REF) -> NetworkScenario:
    return NetworkScenario(per_m2(lambda_b_km2), per_m2(lambda_u_km2), T)


def _grid():
    return [(lb, lu) for lu in LAMBDA_U_SET for lb in GRID_LAMBDA_B]


# -- criteria -------------------------------------------------------------------


def check_oracle_equivalence() -> CriterionResult:
    model = reference_model()
    start = time.perf_counter()
    worst = 0.0
    for lb, lu in _grid():
        s = scenario(lb, lu)
        worst = max(worst, abs(analysis.coverage_exact(model, s).value - analysis.coverage_general(model, s).value))
    runtime = time.perf_counter() - start
    return CriterionResult(
        "C1", "exact integral vs general double integral on 6x4 grid",
        worst <= 1e-6 and runtime < 60.0, worst, "1e-06 abs; runtime<60s",
        {"runtime_s": runtime},
    )


def simulation_spec(workers: int = 1, trials: int = SIM_TRIALS) -> SweepSpec:
    return SweepSpec(
        lambda_b_grid=[],
        lambda_u_list=[],
        points=list(SIM_POINTS),
        model_set=[reference_model()],
        T_db=10.0,
        methods=["montecarlo", "exact"],
        sim=SimConfig(trials=trials, master_seed=SIM_SEED, load_mode=LoadMode.EXACT_VORONOI, workers=workers),
    )


def check_simulation_match(rows: list[dict] | None = None, runtime: float | None = None) -> CriterionResult:
    if rows is None:
        start = time.perf_counter()
        rows = run_sweep(simulation_spec())
        runtime = time.perf_counter() - start
    by_point: dict = {}
    for r in rows:
        by_point.setdefault((r["lambda_b_per_km2"], r["lambda_u_per_km2"]), {})[r["method"]] = r
    worst_ratio = 0.0
    gaps = {}
    for key, methods in by_point.items():
        mc, ex = methods["montecarlo"], methods["exact"]
        gap = abs(mc["coverage"] - ex["coverage"])
        allowed = max(3.0 * mc["coverage_ci_halfwidth"], 0.02)
        gaps[f"{key[0]:g}/{key[1]:g}"] = (mc["coverage"], ex["coverage"], gap, allowed)
        worst_ratio = max(worst_ratio, gap / allowed)
    ok = worst_ratio <= 1.0 and (runtime is None or runtime < 600.0)
    return CriterionResult(
        "C2", "Monte Carlo (ExactVoronoi, 2e4 trials) vs exact at 8 points",
        ok, worst_ratio, "gap/max(3*hw,0.02)<=1; runtime<600s",
        {"points": gaps, "runtime_s": runtime},
    )


def check_bound_sandwich() -> CriterionResult:
    model = reference_model()
    worst = -math.inf
    for lb, lu in _grid():
        s = scenario(lb, lu)
        exact = analysis.coverage_exact(model, s).value
        lower, upper, _ = analysis.coverage_bounds(model, s)
        worst = max(worst, lower.value - exact, exact - upper.value)
    return CriterionResult(
        "C3", "lower bound <= exact <= upper bound on 6x4 grid",
        worst <= 1e-9, worst, "violation<=1e-09",
    )


def check_asymptotic_limit() -> CriterionResult:
    model = reference_model()
    worst = 0.0
    for lu in (20.0, 200.0, 2000.0):
        s = scenario(1e4 * lu, lu)
        limit = analysis.coverage_asymptotic(model, s.lambda_u, s.T).value
        worst = max(worst, abs(analysis.coverage_exact(model, s).value - limit) / limit)
    return CriterionResult(
        "C4", "exact coverage at lambda_b=1e4*lambda_u vs exp(-lambda_u*pi*c_T)",
        worst <= 0.01, worst, "1% relative",
    )


def check_ase_limit() -> CriterionResult:
    model = reference_model()
    s = scenario(1e8, 200.0)
    limit = analysis.ase_limit(model, s.lambda_u, s.T)
    rel = abs(analysis.ase(model, s) / limit - 1.0)
    worst_sandwich = -math.inf
    for lb, lu in _grid():
        g = scenario(lb, lu)
        value = analysis.ase(model, g)
        lo, hi = analysis.ase_bounds(model, g)
        scale = max(value, 1e-300)
        worst_sandwich = max(worst_sandwich, (lo - value) / scale, (value - hi) / scale)
    return CriterionResult(
        "C5", "ASE at 1e8/km^2 vs lambda_u*exp(-lambda_u*pi*c_T)*log2(1+T); ASE bounds sandwich",
        rel <= 0.01 and worst_sandwich <= 1e-9, rel, "1% relative; sandwich violation<=1e-09 rel",
        {"sandwich_violation": worst_sandwich},
    )


SHAPE_LAMBDA_B = tuple(10.0 ** (k / 4.0) for k in range(0, 25))  # 1 .. 1e6 per km^2


def coverage_curve(lambda_u_km2: float) -> list[float]:
    model = reference_model()
    return [analysis.coverage_exact(model, scenario(lb, lambda_u_km2)).value for lb in SHAPE_LAMBDA_B]


def near_field_onset_km2(model: PathLossModel) -> float:
    """BS density at which one BS is expected inside the critical distance."""
    return 1.0 / (math.pi * model.R_c ** 2) * 1e6


def check_curve_shapes() -> CriterionResult:
    model = reference_model()
    low = coverage_curve(20.0)
    drop_low = max(a - b for a, b in zip(low, low[1:]))
    ok_a = drop_low <= 5e-3

    mid = coverage_curve(200.0)
    plateau = analysis.coverage_asymptotic(model, per_m2(200.0), T_REF).value
    best_dip = -math.inf
    for k in range(1, len(mid) - 1):
        dip = min(max(mid[:k]) - mid[k], plateau - mid[k])
        best_dip = max(best_dip, dip)
    ok_b = best_dip >= 0.02

    full = coverage_curve(math.inf)
    onset = near_field_onset_km2(model)
    past = [v for lb, v in zip(SHAPE_LAMBDA_B, full) if lb >= onset]
    rise = max(b - a for a, b in zip(past, past[1:]))
    at_top = full[-1]
    ok_c = at_top < 1e-2 and rise <= 0.0
    return CriterionResult(
        "C6", "coverage curve shapes: monotone at 20/km^2, U-shape at 200/km^2, collapse at full load",
        ok_a and ok_b and ok_c, best_dip, "(a) drop<=5e-3 (b) dip>=0.02 (c) P(1e6)<1e-2 and non-increasing",
        {"a_max_drop": drop_low, "b_dip": best_dip, "c_value_1e6": at_top, "c_max_rise": rise},
    )


def check_model_ordering() -> CriterionResult:
    bounded = reference_model()
    unbounded = reference_model(Variant.UNBOUNDED_SINGLE_SLOPE)
    worst = math.inf
    for lb in (1e4, 10 ** 4.5, 1e5, 10 ** 5.5, 1e6):
        s = scenario(lb, math.inf)
        diff = analysis.coverage_general(unbounded, s).value - analysis.coverage_general(bounded, s).value
        worst = min(worst, diff)
    return CriterionResult(
        "C7", "UnboundedSingleSlope >= BoundedDualSlope coverage at lambda_b>=1e4/km^2, full load",
        worst >= 0.0, worst, "min difference>=0",
    )


def single_slope_full_load(T: float) -> float:
    """Closed-form coverage for the unbounded alpha=4 single-slope law at full load."""
    rt = math.sqrt(T)
    return 1.0 / (1.0 + rt * (math.pi / 2.0 - math.atan(1.0 / rt)))


def check_baseline() -> CriterionResult:
    model = reference_model(Variant.UNBOUNDED_SINGLE_SLOPE)
    values = [analysis.coverage_general(model, scenario(lb, math.inf, 1.0)).value for lb in (1e2, 1e3, 1e4)]
    err = abs(values[0] - 0.56010)
    spread = max(values) - min(values)
    return CriterionResult(
        "C8", "unbounded single-slope full-load baseline 0.56010, density invariant",
        err <= 1e-3 and spread < 1e-4, err, "1e-3 abs; spread<1e-4",
        {"values": values, "spread": spread, "closed_form": single_slope_full_load(1.0)},
    )


P_ACTIVE_RATIOS = (0.1, 1.0, 3.5, 10.0)


def empirical_active_fraction(ratio: float, trials: int = 400, seed: int = 11) -> float:
    model = reference_model()
    lb = 1e3
    s = scenario(lb, ratio * lb)
    cfg = SimConfig(trials=trials, master_seed=seed, min_expected_bs=2000, load_mode=LoadMode.EXACT_VORONOI)
    return montecarlo.estimate_coverage(model, s, cfg).p_active


def check_active_probability() -> CriterionResult:
    worst = 0.0
    measured = {}
    for ratio in P_ACTIVE_RATIOS:
        emp = empirical_active_fraction(ratio)
        eq1 = analysis.active_probability(scenario(1e3, ratio * 1e3))
        measured[ratio] = (emp, eq1)
        worst = max(worst, abs(emp - eq1))
    eq1_35 = analysis.active_probability(scenario(1.0, 3.5))
    ok = worst <= 0.01 and abs(eq1_35 - 0.91161) <= 1e-5
    return CriterionResult(
        "C9", "empirical active fraction vs active_probability; value at lambda_u=3.5*lambda_b",
        ok, worst, "0.01 abs; 0.91161+-1e-5",
        {"by_ratio": measured, "eq1_at_3.5": eq1_35},
    )


def euler_integral_F(b: float, z: float) -> float:
    """``b * int_0^1 t**(b-1) / (1 + z t) dt`` by 30-digit tanh-sinh quadrature.

    Substituting ``t = s**(1/b)`` removes the endpoint singularity.
    """
    with mpmath.workdps(30):
        b_ = mpmath.mpf(b)
        z_ = mpmath.mpf(z)
        f = lambda s: 1 / (1 + z_ * s ** (1 / b_))  # noqa: E731
        knee = z_ ** (-b_) if z_ > 1 else mpmath.mpf("0.5")
        return float(mpmath.quad(f, [0, knee, 1]))


def check_special_functions() -> CriterionResult:
    worst = 0.0
    for b in (0.2, 0.5, 0.8):
        for z in (0.1, 1.0, 10.0, 1e3):
            ref = euler_integral_F(b, z)
            worst = max(worst, abs(hyp_F(b, z) - ref) / ref)
    ln2_err = abs(hyp_F(1.0, 1.0) - math.log(2.0))
    return CriterionResult(
        "C10", "hyp_F vs Euler-integral quadrature; hyp_F(1,1)=ln 2",
        worst <= 1e-10 and ln2_err <= 1e-12, worst, "1e-10 rel; ln2 1e-12",
        {"ln2_error": ln2_err},
    )


def check_determinism(reference_csv: str | None = None, workers: int = 2) -> CriterionResult:
    if reference_csv is None:
        reference_csv = rows_to_csv(run_sweep(simulation_spec(workers=1)))
    again = rows_to_csv(run_sweep(simulation_spec(workers=workers)))
    same = again == reference_csv
    return CriterionResult(
        "C11", f"C2 simulation CSV identical at workers=1 and workers={workers}",
        same, 0.0 if same else 1.0, "byte-identical",
    )


def run_all(only: set[str] | None = None, emit: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    """Run the acceptance suite; C11 reuses the C2 simulation output."""
    results = []
    cache: dict = {}

    def sim_rows():
        if "rows" not in cache:
            start = time.perf_counter()
            cache["rows"] = run_sweep(simulation_spec())
            cache["runtime"] = time.perf_counter() - start
        return cache["rows"], cache["runtime"]

    checks = [
        ("C1", check_oracle_equivalence),
        ("C2", lambda: check_simulation_match(*sim_rows())),
        ("C3", check_bound_sandwich),
        ("C4", check_asymptotic_limit),
        ("C5", check_ase_limit),
        ("C6", check_curve_shapes),
        ("C7", check_model_ordering),
        ("C8", check_baseline),
        ("C9", check_active_probability),
        ("C10", check_special_functions),
        ("C11", lambda: check_determinism(rows_to_csv(sim_rows()[0]))),
    ]
    for cid, fn in checks:
        if only and cid not in only:
            continue
        res = fn()
        results.append(res)
        if emit is not None:
            emit(res)
    return results


REPORT_HEADER = "id,status,measured,tolerance,description"
