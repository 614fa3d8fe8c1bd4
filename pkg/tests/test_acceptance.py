"""Acceptance criteria 1-11, one test each.

Every test prints a report line (id, status, measured value, tolerance) and
the lines are repeated in the pytest terminal summary. Run on its own with
``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import time

import pytest

from conftest import ACCEPTANCE_LINES
from udn_coverage import validation
from udn_coverage.sweep import rows_to_csv, run_sweep


def record(result):
    line = result.line()
    print(line)
    if result.details:
        print("  details:", result.details)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, f"{line} {result.details}"


@pytest.fixture(scope="module")
def simulation_run():
    start = time.perf_counter()
    rows = run_sweep(validation.simulation_spec())
    return rows, time.perf_counter() - start


def test_c01_oracle_equivalence():
    record(validation.check_oracle_equivalence())


def test_c02_simulation_matches_analysis(simulation_run):
    record(validation.check_simulation_match(*simulation_run))


def test_c03_bound_sandwich():
    record(validation.check_bound_sandwich())


def test_c04_asymptotic_limit():
    record(validation.check_asymptotic_limit())


def test_c05_ase_limit_and_bounds():
    record(validation.check_ase_limit())


def test_c06_curve_shapes():
    record(validation.check_curve_shapes())


def test_c07_model_ordering():
    record(validation.check_model_ordering())


def test_c08_single_slope_baseline():
    record(validation.check_baseline())


def test_c09_active_probability():
    record(validation.check_active_probability())


def test_c10_special_functions():
    record(validation.check_special_functions())


def test_c11_determinism_across_parallelism(simulation_run):
    record(validation.check_determinism(rows_to_csv(simulation_run[0]), workers=2))


if __name__ == "__main__":
    results = validation.run_all(emit=lambda r: print(r.line(), flush=True))
    raise SystemExit(0 if all(r.passed for r in results) else 3)
