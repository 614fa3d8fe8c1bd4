import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udn_coverage.specfun import (
    ConvergenceError,
    QuadratureSpec,
    hyp_F,
    hyp_F_pfaff_check,
    integrate,
)


def euler_oracle(b, z):
    """b * int_0^1 t^(b-1)/(1+zt) dt at 30 digits, with t = s^(1/b)."""
    with mpmath.workdps(30):
        b_, z_ = mpmath.mpf(b), mpmath.mpf(z)
        knee = z_ ** (-b_) if z_ > 1 else mpmath.mpf("0.5")
        return float(mpmath.quad(lambda s: 1 / (1 + z_ * s ** (1 / b_)), [0, knee, 1]))


def test_zero_argument():
    assert hyp_F(0.5, 0.0) == 1.0


def test_log_identity():
    assert hyp_F(1.0, 1.0) == pytest.approx(math.log(2.0), abs=1e-12)
    for z in (0.2, 3.0, 50.0, 1e9):
        assert hyp_F(1.0, z) == pytest.approx(math.log1p(z) / z, rel=1e-14)


def test_euler_integral_at_half_and_ten():
    assert hyp_F(0.5, 10.0) == pytest.approx(euler_oracle(0.5, 10.0), rel=1e-10)


def test_half_has_arctan_form():
    # b = 1/2: F = arctan(sqrt z)/sqrt z
    for z in (0.1, 2.0, 10.0, 1e6):
        assert hyp_F(0.5, z) == pytest.approx(math.atan(math.sqrt(z)) / math.sqrt(z), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(b=st.floats(1e-4, 8.0), z=st.floats(0.0, 1e12))
def test_matches_mpmath(b, z):
    ref = float(mpmath.hyp2f1(1, b, 1 + b, -z))
    assert hyp_F(b, z) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("b", [0.2, 0.8, 1.7])
@pytest.mark.parametrize("z", [0.3, 0.9, 4.5, 1e3])
def test_pfaff_paths_agree(b, z):
    assert hyp_F(b, z) == pytest.approx(hyp_F_pfaff_check(b, z), rel=1e-13)


@pytest.mark.parametrize("b", [0.2, 0.5, 0.8, 2.5])
def test_bounded_and_decreasing(b):
    z = np.logspace(-3, 8, 300)
    values = np.array([hyp_F(b, x) for x in z])
    assert np.all(values > 0) and np.all(values <= 1)
    assert np.all(np.diff(values) < 0)


@pytest.mark.parametrize("b, z", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5), (math.nan, 1.0), (1.0, math.inf)])
def test_domain_errors(b, z):
    with pytest.raises(ValueError):
        hyp_F(b, z)


def test_integrate_exponential_half_line():
    assert integrate(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, rel=1e-10)


def test_integrate_quarter_pi():
    assert integrate(lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0) == pytest.approx(math.pi / 4, rel=1e-12)


def test_integrate_linearity():
    f = lambda x: math.sin(x) ** 2  # noqa: E731
    g = lambda x: math.exp(-x) * x  # noqa: E731
    both = integrate(lambda x: 2.0 * f(x) - 3.0 * g(x), 0.0, 3.0)
    assert both == pytest.approx(2.0 * integrate(f, 0.0, 3.0) - 3.0 * integrate(g, 0.0, 3.0), rel=1e-12)


def test_integrate_breakpoints_handle_jump():
    step = lambda x: 1.0 if x < 0.3 else 5.0  # noqa: E731
    assert integrate(step, 0.0, 1.0, breakpoints=[0.3]) == pytest.approx(0.3 + 3.5, rel=1e-13)


def test_integrate_rejects_non_decaying_tail():
    with pytest.raises(ValueError):
        integrate(lambda x: 1.0 / (1.0 + x), 0.0, math.inf)


def test_integrate_reports_non_convergence():
    spec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=3)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sin(1.0 / x), 1e-6, 1.0, spec)
    assert math.isfinite(info.value.estimate)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.0), dict(abs_tol=-1.0), dict(max_subdivisions=0), dict(rel_tol=1e-16, abs_tol=0.0)])
def test_quadrature_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)
