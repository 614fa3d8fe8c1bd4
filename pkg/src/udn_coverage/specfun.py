"""Numerical kernels: the ``2F1(1, b; 1+b; -z)`` family and a quadrature wrapper."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from scipy import integrate as _spi

_EPS = 2.0 ** -53
_MAX_TERMS = 10_000


class ConvergenceError(ArithmeticError):
    """Raised when a numerical routine cannot reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best value obtained before giving up.
    error_bound : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message: str, estimate: float = math.nan, error_bound: float = math.inf):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be non-negative")
        if self.abs_tol == 0 and self.rel_tol < 50 * _EPS:
            raise ValueError("with abs_tol=0, rel_tol must be at least 50 machine epsilons")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def _series_small(b: float, z: float) -> float:
    # sum_k (-z)^k * b / (b + k), for z <= 0.5
    total = 1.0
    power = 1.0
    for k in range(1, _MAX_TERMS):
        power *= -z
        term = power * b / (b + k)
        total += term
        if abs(term) <= _EPS * abs(total):
            return total
    raise ConvergenceError("direct series did not converge", total)


def _series_pfaff(b: float, z: float) -> float:
    # (1+z)^-1 * 2F1(1, 1; 1+b; w), w = z/(1+z)
    w = z / (1.0 + z)
    total = 1.0
    term = 1.0
    for k in range(_MAX_TERMS):
        term *= w * (k + 1) / (k + 1 + b)
        total += term
        if term <= _EPS * total:
            return total / (1.0 + z)
    raise ConvergenceError("Pfaff-transformed series did not converge", total / (1.0 + z))


def _reflected(f: float, z: float) -> float:
    # 0 < f < 1, z > 4:  F(f, z) = z^-f pi f / sin(pi f) - f / ((1 - f) z) * F(1 - f, 1/z)
    lead = math.exp(-f * math.log(z)) * math.pi * f / math.sin(math.pi * f)
    return lead - f / ((1.0 - f) * z) * _series_small(1.0 - f, 1.0 / z)


def hyp_F(b: float, z: float) -> float:
    """``2F1(1, b; 1+b; -z)`` for ``b > 0`` and ``z >= 0``.

    Equivalent to ``b * integral_0^1 t**(b-1) / (1 + z t) dt``, which lies in
    ``(0, 1]`` and decreases in ``z``.

    Three routes are used: the power series for ``z <= 0.5``, the Pfaff
    transformed series in ``z/(1+z)`` up to ``z = 4``, and beyond that the
    ``1/z`` connection formula on the fractional part of ``b``, lifted to the
    requested ``b`` by the contiguous relation
    ``F(b+1, z) = (b+1)(1 - F(b, z)) / (b z)``.

    Raises
    ------
    ValueError
        If ``b <= 0`` or ``z < 0`` or either is not finite.
    """
    b = float(b)
    z = float(z)
    if not (math.isfinite(b) and b > 0):
        raise ValueError(f"b must be positive and finite, got {b!r}")
    if not (math.isfinite(z) and z >= 0):
        raise ValueError(f"z must be non-negative and finite, got {z!r}")
    if z == 0.0:
        return 1.0
    if z <= 0.5:
        return _series_small(b, z)
    if z <= 4.0:
        return _series_pfaff(b, z)

    n = math.floor(b)
    f = b - n
    if f == 0.0:
        base_b = 1.0
        value = math.log1p(z) / z
        n -= 1
    elif f < 0.01 or f > 0.95:
        # the connection formula and the recurrence cancel digits near integer b
        return float(mpmath.hyp2f1(1, b, 1 + b, -z))
    else:
        base_b = f
        value = _reflected(f, z)
    for _ in range(n):
        value = (base_b + 1.0) * (1.0 - value) / (base_b * z)
        base_b += 1.0
    return value


def hyp_F_pfaff_check(b: float, z: float) -> float:
    """``2F1(1, 1; 1+b; z/(1+z)) / (1+z)`` evaluated independently of :func:`hyp_F`.

    Equal to ``hyp_F(b, z)`` by the Pfaff transformation; used as a
    self-consistency check between two evaluation paths.
    """
    w = z / (1.0 + z)
    return float(mpmath.hyp2f1(1, 1, 1 + b, w)) / (1.0 + z)


def _tail_decays(f: Callable[[float], float], lo: float) -> bool:
    x = max(abs(lo), 1.0) * 1e12
    try:
        fx = f(x)
    except (OverflowError, ZeroDivisionError, ValueError):
        return True
    return math.isfinite(fx) and abs(fx) * x < 1e-3


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    ``hi`` may be ``math.inf``; QUADPACK then maps the half line onto
    ``(0, 1]``. Interior ``breakpoints`` split the range so that kinks and
    discontinuities of ``f`` land on segment edges.

    Raises
    ------
    ConvergenceError
        If any segment's error estimate exceeds the tolerance.
    ValueError
        If ``hi`` is infinite and ``f`` does not decay faster than ``1/x``.
    """
    if not hi >= lo:
        raise ValueError("need hi >= lo")
    if math.isinf(hi) and not _tail_decays(f, lo):
        raise ValueError("integrand does not decay integrably at infinity")
    edges = [lo] + sorted(p for p in breakpoints if lo < p < hi) + [hi]
    total = 0.0
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        value, err, _info, *warning = _spi.quad(
            f,
            a,
            b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=1,
        )
        total += value
        err_total += err
        allowed = max(spec.abs_tol, spec.rel_tol * abs(value))
        if warning and err > 10.0 * allowed:
            raise ConvergenceError(f"quadrature on [{a}, {b}] failed", total, err_total)
    return total
