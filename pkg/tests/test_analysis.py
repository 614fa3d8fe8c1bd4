import math
import warnings

import mpmath
import numpy as np
import pytest
from scipy.integrate import trapezoid as trapezoid_rule
from scipy.special import hyp2f1

from udn_coverage import analysis
from udn_coverage.analysis import (
    FULL_LOAD,
    Method,
    NetworkScenario,
    active_probability,
    c_T,
    coverage_asymptotic,
    coverage_bounds,
    coverage_exact,
    coverage_general,
)
from udn_coverage.pathloss import DiscontinuousPathLossWarning, PathLossModel, Variant, attenuation
from udn_coverage.specfun import integrate

MODEL = PathLossModel.reference()
T10 = 10.0
KM2 = 1e6

# Plateau interference constant of the reference model at T = 10 (m^2), taken
# from the independent mpmath quadrature in test_plateau_constant_oracle.
C_T_REFERENCE = 23.343994345463


def sc(lb_km2, lu_km2, T=T10):
    return NetworkScenario(lb_km2 / KM2, lu_km2 / KM2, T)


def area_oracle(model, T, z):
    """int_z^inf du / (1 + l(sqrt z)/(T l(sqrt u))) at 25 digits."""
    g0 = mpmath.mpf(attenuation(model, math.sqrt(z)))
    k, a = model.far_field()

    def l(u):
        d = mpmath.sqrt(u)
        if model.variant.bounded and d <= model.R_b:
            return mpmath.mpf(1)
        if model.variant.dual_slope and d <= model.R_c:
            return d ** -model.alpha_c
        return k * d ** -a

    with mpmath.workdps(25):
        pts = [z] + [p * p for p in model.breakpoints() if p * p > z] + [mpmath.inf]
        return float(mpmath.quad(lambda u: 1 / (1 + g0 / (T * l(u))), pts))


# -- active probability --------------------------------------------------------


def test_active_probability_examples():
    assert active_probability(sc(100, 0)) == 0.0
    assert active_probability(sc(100, 350)) == pytest.approx(1 - 2 ** -3.5, abs=1e-12)
    assert active_probability(sc(100, 350)) == pytest.approx(0.91161, abs=1e-5)
    assert active_probability(sc(1e4, 2e8)) >= 0.999999
    assert active_probability(sc(1e4, FULL_LOAD)) == 1.0


def test_active_probability_increases_with_load():
    values = [active_probability(sc(1e3, lu)) for lu in (1, 10, 100, 1e3, 1e4)]
    assert all(a < b for a, b in zip(values, values[1:]))


# -- c_T and the G terms ---------------------------------------------------------


def test_plateau_constant_oracle():
    oracle = area_oracle(MODEL, T10, 0.0)
    assert c_T(MODEL, T10, MODEL.R_b) == pytest.approx(oracle, rel=1e-11)
    assert c_T(MODEL, T10, MODEL.R_b) == pytest.approx(C_T_REFERENCE, rel=1e-12)
    assert analysis.plateau_constant(MODEL, T10) == c_T(MODEL, T10, 1.0)


@pytest.mark.parametrize("x", [1.0, 3.0, 20.0, 70.0])
def test_c_T_vs_independent_hypergeometric(x):
    # same formula rebuilt on scipy's 2F1
    T, ac, a, Rb, Rc = T10, 2.5, 4.0, 1.0, 70.0

    def F(b, z):
        return hyp2f1(1.0, b, 1.0 + b, -z)

    expected = (
        Rc ** 2 * F(2 / ac, (Rc / x) ** ac / T)
        - Rb ** 2 * (F(2 / ac, 1 / T) - T / (1 + T))
        + 2 * T * x ** ac * Rc ** (2 - ac) / (a - 2) * F(1 - 2 / a, T * (x / Rc) ** ac)
    )
    assert c_T(MODEL, T, x) == pytest.approx(expected, rel=1e-13)


def test_c_T_vanishes_with_threshold():
    assert c_T(MODEL, 1e-8, 1.0) < 1e-6 * c_T(MODEL, T10, 1.0)


def test_c_T_increasing_in_threshold():
    values = [c_T(MODEL, T, 1.0) for T in (0.1, 1.0, 10.0, 100.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_c_T_outside_range():
    with pytest.raises(ValueError):
        c_T(MODEL, T10, 0.5)
    with pytest.raises(ValueError):
        c_T(MODEL, T10, 71.0)


@pytest.mark.parametrize("T", [0.1, 1.0, 10.0, 100.0])
def test_G3_closed_form(T):
    # far field with alpha = 4: int_1^inf dv / (1 + v^2/T) = sqrt(T)(pi/2 - arctan(1/sqrt T))
    rt = math.sqrt(T)
    assert analysis.G3(MODEL, T) == pytest.approx(rt * (math.pi / 2 - math.atan(1 / rt)), rel=1e-13)


def test_G1_times_r_is_affine():
    r, r2 = 0.2, 0.9
    lhs = analysis.G1(MODEL, T10, r) * r - analysis.G1(MODEL, T10, r2) * r2
    assert lhs == pytest.approx(-T10 / (1 + T10) * (r - r2), rel=1e-12)


def test_G2_decreasing():
    assert analysis.G2(MODEL, T10, 1.0) > analysis.G2(MODEL, T10, 4900.0)
    r = np.linspace(1.0, 4900.0, 100)
    values = [analysis.G2(MODEL, T10, x) for x in r]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("r", [0.3, 1.0, 2.0, 400.0, 4900.0, 9000.0])
def test_G_terms_equal_interference_area(r):
    # r * G(r) is the interference area seen from a server at squared distance r
    if r <= 1.0:
        g = analysis.G1(MODEL, T10, r)
    elif r <= 4900.0:
        g = analysis.G2(MODEL, T10, r)
    else:
        g = analysis.G3(MODEL, T10)
    assert r * g == pytest.approx(area_oracle(MODEL, T10, r), rel=1e-10)
    assert analysis.interference_area(MODEL, T10, r) == pytest.approx(area_oracle(MODEL, T10, r), rel=1e-10)


def test_G_terms_continuous_at_junctions():
    assert analysis.G1(MODEL, T10, 1.0) == pytest.approx(analysis.G2(MODEL, T10, 1.0), rel=1e-13)
    assert analysis.G2(MODEL, T10, 4900.0) == pytest.approx(analysis.G3(MODEL, T10), rel=1e-12)


# -- coverage ------------------------------------------------------------------


def test_middle_integral_vs_trapezoid():
    lb = 1e-4
    pa = 1.0
    scale = lb * math.pi

    def middle(r):
        return scale * math.exp(-scale * r * (1 + pa * analysis.G2(MODEL, T10, r)))

    # the same integrand built on scipy's 2F1, summed by a 1e6-point trapezoid
    r = np.linspace(1.0, 4900.0, 1_000_000)
    x = np.sqrt(r)
    T, ac, a, Rc = T10, 2.5, 4.0, 70.0
    F = lambda b, z: hyp2f1(1.0, b, 1.0 + b, -z)  # noqa: E731
    f0 = F(2 / ac, 1 / T)
    cT = Rc ** 2 * F(2 / ac, (Rc / x) ** ac / T) - (f0 - T / (1 + T)) \
        + 2 * T * x ** ac * Rc ** (2 - ac) / (a - 2) * F(1 - 2 / a, T * (x / Rc) ** ac)
    g2 = (cT + (f0 - T / (1 + T))) / r - f0
    trapezoid = trapezoid_rule(scale * np.exp(-scale * r * (1 + pa * g2)), r)
    assert integrate(middle, 1.0, 4900.0) == pytest.approx(trapezoid, rel=1e-8)


def test_zero_threshold_covers_everyone():
    assert coverage_exact(MODEL, sc(100, 200, 1e-9)).value == pytest.approx(1.0, abs=1e-5)


def test_exact_matches_general_full_load():
    s = sc(1e2, FULL_LOAD)
    assert coverage_exact(MODEL, s).value == pytest.approx(coverage_general(MODEL, s).value, abs=1e-6)


def test_exact_reaches_asymptote():
    s = sc(1e6, 200)
    limit = coverage_asymptotic(MODEL, s.lambda_u, T10).value
    assert coverage_exact(MODEL, s).value == pytest.approx(limit, rel=0.01)


def test_full_load_sentinel_matches_proxy():
    for lb in (1e1, 1e3, 1e5):
        sentinel = coverage_exact(MODEL, sc(lb, FULL_LOAD)).value
        proxy = coverage_exact(MODEL, sc(lb, 2e8)).value
        assert sentinel == pytest.approx(proxy, abs=1e-6)


def test_result_carries_method():
    res = analysis.coverage(MODEL, sc(1e3, 200), "ExactIntegral")
    assert res.method is Method.EXACT and res.half_width is None
    with pytest.raises(ValueError):
        analysis.coverage(MODEL, sc(1e3, 200), Method.MONTE_CARLO)


def test_closed_forms_require_bounded_dual_slope():
    other = PathLossModel.reference(Variant.UNBOUNDED_SINGLE_SLOPE)
    with pytest.raises(ValueError):
        coverage_exact(other, sc(1e3, 200))


def test_bound_sandwich_grid():
    for lb in np.logspace(1, 6, 5):
        for lu in (20, 200, 2000):
            s = sc(lb, lu)
            exact = coverage_exact(MODEL, s).value
            lower, upper, terms = coverage_bounds(MODEL, s)
            assert lower.value <= exact + 1e-12 and exact <= upper.value + 1e-12
            assert terms.H2l >= terms.H2u


def test_bounds_squeeze_at_extreme_density():
    lower, upper, _ = coverage_bounds(MODEL, sc(1e8, 200))
    assert upper.value - lower.value < 1e-4


def test_bounds_collapse_at_full_load():
    lower, upper, _ = coverage_bounds(MODEL, sc(1e6, FULL_LOAD))
    assert lower.value < 1e-3 and upper.value < 1e-3


def test_asymptotic_values():
    assert coverage_asymptotic(MODEL, 0.0, T10).value == 1.0
    values = [coverage_asymptotic(MODEL, lu / KM2, T10).value for lu in (20, 200, 2000)]
    assert values[0] > values[1] > values[2]
    assert values[1] == pytest.approx(math.exp(-200 / KM2 * math.pi * C_T_REFERENCE), rel=1e-12)


def test_unbounded_single_slope_baseline():
    m = PathLossModel.reference(Variant.UNBOUNDED_SINGLE_SLOPE)
    closed = 1.0 / (1.0 + math.pi / 4.0)
    values = [coverage_general(m, sc(lb, FULL_LOAD, 1.0)).value for lb in (1e2, 1e3, 1e4)]
    for v in values:
        assert v == pytest.approx(closed, abs=1e-6)
        assert v == pytest.approx(0.56010, abs=1e-3)


def test_equal_exponents_match_single_slope():
    dual = PathLossModel(Variant.BOUNDED_DUAL_SLOPE, alpha_c=4.0, alpha=4.0)
    single = PathLossModel(Variant.BOUNDED_SINGLE_SLOPE, alpha=4.0)
    for lb in (1e2, 1e4):
        s = sc(lb, 200)
        assert coverage_general(dual, s).value == pytest.approx(coverage_general(single, s).value, abs=1e-6)
        assert coverage_exact(dual, s).value == pytest.approx(coverage_general(single, s).value, abs=1e-6)


def test_plateau_radius_two_exact_matches_general():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscontinuousPathLossWarning)
        m = PathLossModel(R_b=2.0)
    for lb, lu in ((1e3, 200), (1e5, FULL_LOAD)):
        s = sc(lb, lu)
        assert coverage_exact(m, s).value == pytest.approx(coverage_general(m, s).value, abs=1e-6)


# -- ASE -----------------------------------------------------------------------


def test_ase_zero_cases():
    assert analysis.ase(MODEL, sc(1e3, 0)) == 0.0
    assert analysis.ase(MODEL, sc(1e3, 200, 1e-12)) == pytest.approx(0.0, abs=1e-12)
    assert analysis.ase_bounds(MODEL, sc(1e3, 0)) == (0.0, 0.0)


def test_ase_definition():
    s = sc(1e3, 200)
    expected = active_probability(s) * s.lambda_b * coverage_exact(MODEL, s).value * math.log2(11.0)
    assert analysis.ase(MODEL, s) == pytest.approx(expected, rel=1e-14)


def test_ase_limit():
    s = sc(1e8, 200)
    limit = analysis.ase_limit(MODEL, s.lambda_u, T10)
    assert limit == pytest.approx(s.lambda_u * math.exp(-s.lambda_u * math.pi * C_T_REFERENCE) * math.log2(11), rel=1e-12)
    assert analysis.ase(MODEL, s) == pytest.approx(limit, rel=0.01)
    lo, hi = analysis.ase_bounds(MODEL, s)
    assert lo == pytest.approx(limit, rel=0.01) and hi == pytest.approx(limit, rel=0.01)


def test_ase_sandwich():
    for lb in (1e1, 1e3, 1e5):
        for lu in (20, 2000, FULL_LOAD):
            s = sc(lb, lu)
            lo, hi = analysis.ase_bounds(MODEL, s)
            value = analysis.ase(MODEL, s)
            assert lo <= value * (1 + 1e-12) and value <= hi * (1 + 1e-12)


@pytest.mark.parametrize(
    "args", [(0.0, 1e-4, 10.0), (1e-4, -1.0, 10.0), (1e-4, 1e-4, 0.0), (math.inf, 1e-4, 10.0)]
)
def test_scenario_validation(args):
    with pytest.raises(ValueError):
        NetworkScenario(*args)
