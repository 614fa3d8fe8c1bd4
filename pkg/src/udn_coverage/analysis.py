"""Analytical SIR coverage probability and area spectral efficiency.

Everything here is for a typical UE at the origin of a PPP network with
density ``lambda_b`` (BS per m^2), nearest-BS association, Rayleigh fading,
and interferers thinned to density ``p_a * lambda_b``.

Distances squared ("areas", m^2) are the natural integration variable: with
``r = d**2`` the nearest-BS density is ``lambda_b*pi*exp(-lambda_b*pi*r)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .pathloss import PathLossModel, Variant, attenuation
from .specfun import DEFAULT_QUADRATURE, ConvergenceError, QuadratureSpec, hyp_F, integrate

FULL_LOAD = math.inf

# Inner interference integral switches to its closed-form tail once the
# integrand has fallen to this level.
_TAIL_LEVEL = 1e-12
_INNER_QUADRATURE = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14, max_subdivisions=2000)
_OVERSHOOT = 1e-6


@dataclass(frozen=True)
class NetworkScenario:
    """BS density, UE density and SIR threshold.

    ``lambda_u = math.inf`` (:data:`FULL_LOAD`) means every BS transmits.
    """

    lambda_b: float
    lambda_u: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda_b) and self.lambda_b > 0):
            raise ValueError(f"lambda_b must be positive and finite, got {self.lambda_b!r}")
        if math.isnan(self.lambda_u) or self.lambda_u < 0:
            raise ValueError(f"lambda_u must be >= 0, got {self.lambda_u!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive and finite, got {self.T!r}")

    @property
    def full_load(self) -> bool:
        return math.isinf(self.lambda_u)


class Method(str, enum.Enum):
    EXACT = "ExactIntegral"
    LOWER_BOUND = "LowerBound"
    UPPER_BOUND = "UpperBound"
    ASYMPTOTIC = "Asymptotic"
    GENERAL = "GeneralOracle"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class CoverageResult:
    value: float
    method: Method
    half_width: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"coverage must lie in [0, 1], got {self.value!r}")
        if self.half_width is not None and self.half_width < 0:
            raise ValueError("half_width must be non-negative")


@dataclass(frozen=True)
class BoundTerms:
    H1: float
    H2l: float
    H2u: float
    H3: float
    cT: float


def _probability(value: float, method: Method) -> CoverageResult:
    if value > 1.0 + _OVERSHOOT or value < -_OVERSHOOT:
        raise ConvergenceError(f"{method.value} evaluation left [0, 1]", value)
    return CoverageResult(min(max(value, 0.0), 1.0), method)


def _require_dual_slope(model: PathLossModel) -> None:
    if model.variant is not Variant.BOUNDED_DUAL_SLOPE:
        raise ValueError(f"closed forms need a BoundedDualSlope model, got {model.variant.value}")


def active_probability(scenario: NetworkScenario) -> float:
    """Probability that a BS has at least one UE in its Voronoi cell.

    Uses the gamma cell-area approximation ``1 - (1 + lambda_u/(3.5 lambda_b))**-3.5``.
    """
    if scenario.full_load:
        return 1.0
    x = scenario.lambda_u / (3.5 * scenario.lambda_b)
    return -math.expm1(-3.5 * math.log1p(x))


# -- auxiliary terms -----------------------------------------------------------


def _far_term(model: PathLossModel, T: float, x: float) -> float:
    # interference from beyond R_c when the serving gain is x**-alpha_c
    a, ac, Rc = model.alpha, model.alpha_c, model.R_c
    return 2.0 * T * x ** ac * Rc ** (2.0 - ac) / (a - 2.0) * hyp_F(1.0 - 2.0 / a, T * (x / Rc) ** ac)


def c_T(model: PathLossModel, T: float, x: float) -> float:
    """Interference area term (m^2) for a serving BS at distance ``x`` in ``[R_b, R_c]``."""
    _require_dual_slope(model)
    Rb, Rc, ac = model.R_b, model.R_c, model.alpha_c
    slack = 1e-12 * Rc
    if not Rb - slack <= x <= Rc + slack:
        raise ValueError(f"x={x!r} outside [R_b, R_c] = [{Rb}, {Rc}]")
    near = Rc ** 2 * hyp_F(2.0 / ac, (Rc / x) ** ac / T)
    plateau = Rb ** 2 * (hyp_F(2.0 / ac, 1.0 / T) - T / (1.0 + T))
    return near - plateau + _far_term(model, T, x)


def plateau_constant(model: PathLossModel, T: float) -> float:
    """Interference area (m^2) seen by a UE whose serving BS lies inside ``R_b``.

    Equals ``c_T(model, T, R_b)`` when ``R_b = 1`` m. For other ``R_b`` the
    plateau gain 1 differs from ``R_b**-alpha_c`` and this is the value the
    serving-in-plateau integral actually needs.
    """
    _require_dual_slope(model)
    if model.R_b == 1.0:
        return c_T(model, T, 1.0)
    Rb, Rc, ac = model.R_b, model.R_c, model.alpha_c
    near = Rc ** 2 * hyp_F(2.0 / ac, Rc ** ac / T) - Rb ** 2 * hyp_F(2.0 / ac, Rb ** ac / T)
    return Rb ** 2 * T / (1.0 + T) + near + _far_term(model, T, 1.0)


def G1(model: PathLossModel, T: float, r: float) -> float:
    Rb2 = model.R_b ** 2
    if not 0 < r <= Rb2 * (1 + 1e-12):
        raise ValueError(f"r={r!r} outside (0, R_b^2]")
    return plateau_constant(model, T) / r - T / (1.0 + T)


def G2(model: PathLossModel, T: float, r: float) -> float:
    Rb2, Rc2 = model.R_b ** 2, model.R_c ** 2
    if not Rb2 * (1 - 1e-12) <= r <= Rc2 * (1 + 1e-12):
        raise ValueError(f"r={r!r} outside [R_b^2, R_c^2]")
    f = hyp_F(2.0 / model.alpha_c, 1.0 / T)
    x = min(max(math.sqrt(r), model.R_b), model.R_c)
    return (c_T(model, T, x) + Rb2 * (f - T / (1.0 + T))) / r - f


def G3(model: PathLossModel, T: float) -> float:
    _require_dual_slope(model)
    a = model.alpha
    return T / (a / 2.0 - 1.0) * hyp_F(1.0 - 2.0 / a, T)


# -- coverage ----------------------------------------------------------------


def _outer_terms(model: PathLossModel, scenario: NetworkScenario):
    lb, T = scenario.lambda_b, scenario.T
    pa = active_probability(scenario)
    c = plateau_constant(model, T)
    H1 = 1.0 - pa * T / (1.0 + T)
    H3 = 1.0 + pa * G3(model, T)
    Rb2, Rc2 = model.R_b ** 2, model.R_c ** 2
    first = (math.exp(-lb * pa * math.pi * c) - math.exp(-lb * math.pi * (Rb2 * H1 + pa * c))) / H1
    third = math.exp(-lb * math.pi * Rc2 * H3) / H3
    return pa, c, H1, H3, first, third


def _decay_splits(start: float, length: float) -> list[float]:
    # an integrand decaying from `start` on scale `length` can sit entirely
    # between the outermost Kronrod nodes of a long segment
    return [start + length * 10.0 ** j for j in range(-2, 4)]


def coverage_exact(
    model: PathLossModel,
    scenario: NetworkScenario,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CoverageResult:
    """Coverage probability under the bounded dual-slope law.

    The plateau and far-field pieces are closed-form exponentials; only the
    near-field piece over ``[R_b^2, R_c^2]`` is integrated numerically.
    """
    _require_dual_slope(model)
    lb, T = scenario.lambda_b, scenario.T
    pa, _, _, _, first, third = _outer_terms(model, scenario)
    scale = lb * math.pi

    def middle(r):
        return scale * math.exp(-scale * r * (1.0 + pa * G2(model, T, r)))

    Rb2, Rc2 = model.R_b ** 2, model.R_c ** 2
    decay = 1.0 / (scale * (1.0 + pa * G2(model, T, Rb2)))
    mid = integrate(middle, Rb2, Rc2, quad, breakpoints=_decay_splits(Rb2, decay))
    return _probability(first + mid + third, Method.EXACT)


def coverage_bounds(
    model: PathLossModel, scenario: NetworkScenario
) -> tuple[CoverageResult, CoverageResult, BoundTerms]:
    """Closed-form lower and upper coverage bounds.

    The near-field exponent is frozen at its largest value ``G2(R_b^2)`` for
    the lower bound and its smallest ``G2(R_c^2)`` for the upper bound.
    """
    _require_dual_slope(model)
    lb, T = scenario.lambda_b, scenario.T
    pa, c, H1, H3, first, third = _outer_terms(model, scenario)
    Rb2, Rc2 = model.R_b ** 2, model.R_c ** 2
    H2l = 1.0 + pa * G2(model, T, Rb2)
    H2u = 1.0 + pa * G2(model, T, Rc2)

    def mid(H):
        return (math.exp(-lb * math.pi * Rb2 * H) - math.exp(-lb * math.pi * Rc2 * H)) / H

    lower = _probability(first + mid(H2l) + third, Method.LOWER_BOUND)
    upper = _probability(first + mid(H2u) + third, Method.UPPER_BOUND)
    return lower, upper, BoundTerms(H1=H1, H2l=H2l, H2u=H2u, H3=H3, cT=c)


def coverage_asymptotic(model: PathLossModel, lambda_u: float, T: float) -> CoverageResult:
    """Limit of the coverage probability as ``lambda_b`` grows without bound."""
    _require_dual_slope(model)
    if math.isnan(lambda_u) or lambda_u < 0:
        raise ValueError("lambda_u must be >= 0")
    if math.isinf(lambda_u):
        return CoverageResult(0.0, Method.ASYMPTOTIC)
    return CoverageResult(math.exp(-lambda_u * math.pi * plateau_constant(model, T)), Method.ASYMPTOTIC)


def _geometric_splits(a: float, b: float, max_count: int = 16) -> list[float]:
    """Decade points above ``a``; unbounded laws concentrate the integrand near ``a``."""
    if a <= 0:
        return []
    return [a * 10.0 ** j for j in range(1, max_count + 1) if a * 10.0 ** j < b]


def interference_area(model: PathLossModel, T: float, z: float) -> float:
    """``integral_z^inf du / (1 + l(sqrt z) / (T l(sqrt u)))`` for any path loss variant.

    Finite pieces between breakpoints are integrated numerically. The last
    power-law piece is integrated until the integrand falls to about 1e-12
    and closed with its exact tail.
    """
    gain = attenuation(model, math.sqrt(z))
    k, exponent = model.far_field()
    delta = exponent / 2.0
    s = gain / (T * k)

    def g(u):
        return 1.0 / (1.0 + gain / (T * attenuation(model, math.sqrt(u))))

    edges = [z] + [p * p for p in model.breakpoints() if p * p > z]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate(g, a, b, _INNER_QUADRATURE, breakpoints=_geometric_splits(a, b))

    u0 = edges[-1]
    u1 = max(u0, (1.0 / (_TAIL_LEVEL * s)) ** (1.0 / delta))
    if u1 > u0:
        decades = [u0 * 10.0 ** j for j in range(1, int(math.log10(u1 / u0)) + 1)]
        total += integrate(g, u0, u1, _INNER_QUADRATURE, breakpoints=decades)
    w = s * u1 ** delta
    total += u1 / (w * (delta - 1.0)) * hyp_F(1.0 - 1.0 / delta, 1.0 / w)
    return total


def coverage_general(
    model: PathLossModel,
    scenario: NetworkScenario,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CoverageResult:
    """Coverage probability for any path loss variant by nested quadrature.

    Evaluates ``lambda_b*pi * int_0^inf exp(-lambda_b*pi*(z + p_a*A(z))) dz``
    where ``A`` is :func:`interference_area`. Independent of the closed forms
    used by :func:`coverage_exact`.
    """
    lb, T = scenario.lambda_b, scenario.T
    pa = active_probability(scenario)
    scale = lb * math.pi
    tiny = 1e-300

    def outer(z):
        z = max(z, tiny)
        return scale * math.exp(-scale * (z + pa * interference_area(model, T, z)))

    edges = _decay_splits(0.0, 1.0 / scale)
    for p in model.breakpoints():
        z = p * p
        edges.append(z)
        edges += _decay_splits(z, 1.0 / (scale * (1.0 + pa * interference_area(model, T, z) / z)))
    value = integrate(outer, 0.0, math.inf, quad, breakpoints=edges)
    return _probability(value, Method.GENERAL)


# -- area spectral efficiency -------------------------------------------------

_COVERAGE_BY_METHOD = {
    Method.EXACT: lambda m, s: coverage_exact(m, s),
    Method.GENERAL: lambda m, s: coverage_general(m, s),
    Method.LOWER_BOUND: lambda m, s: coverage_bounds(m, s)[0],
    Method.UPPER_BOUND: lambda m, s: coverage_bounds(m, s)[1],
    Method.ASYMPTOTIC: lambda m, s: coverage_asymptotic(m, s.lambda_u, s.T),
}


def coverage(model: PathLossModel, scenario: NetworkScenario, method: Method | str) -> CoverageResult:
    """Dispatch to the analytical evaluator named by ``method``."""
    method = Method(method)
    if method not in _COVERAGE_BY_METHOD:
        raise ValueError(f"{method.value} is not an analytical method")
    return _COVERAGE_BY_METHOD[method](model, scenario)


def spectral_efficiency(T: float) -> float:
    """``log2(1 + T)``, bit/s/Hz of a link that just meets the threshold."""
    return math.log2(1.0 + T)


def ase_from_coverage(scenario: NetworkScenario, coverage_value: float, p_active: float | None = None) -> float:
    """Area spectral efficiency in bit/s/Hz/m^2 given a coverage probability."""
    pa = active_probability(scenario) if p_active is None else p_active
    if pa == 0.0:
        return 0.0
    return pa * scenario.lambda_b * coverage_value * spectral_efficiency(scenario.T)


def ase(model: PathLossModel, scenario: NetworkScenario, coverage_method: Method | str = Method.EXACT) -> float:
    """Area spectral efficiency ``p_a * lambda_b * P_c * log2(1+T)`` in bit/s/Hz/m^2."""
    return ase_from_coverage(scenario, coverage(model, scenario, coverage_method).value)


def ase_bounds(model: PathLossModel, scenario: NetworkScenario) -> tuple[float, float]:
    lower, upper, _ = coverage_bounds(model, scenario)
    return ase_from_coverage(scenario, lower.value), ase_from_coverage(scenario, upper.value)


def ase_limit(model: PathLossModel, lambda_u: float, T: float) -> float:
    """Limit of the ASE as ``lambda_b`` grows: ``lambda_u * exp(-lambda_u*pi*c) * log2(1+T)``."""
    if math.isinf(lambda_u):
        return 0.0
    return lambda_u * coverage_asymptotic(model, lambda_u, T).value * spectral_efficiency(T)
