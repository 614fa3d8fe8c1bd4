"""Bounded dual-slope path loss and the simpler laws it is compared against.

All lengths are in meters. Attenuation is a linear power gain, so a value of
1 means no loss.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np


class Variant(str, enum.Enum):
    BOUNDED_DUAL_SLOPE = "BoundedDualSlope"
    BOUNDED_SINGLE_SLOPE = "BoundedSingleSlope"
    UNBOUNDED_SINGLE_SLOPE = "UnboundedSingleSlope"
    UNBOUNDED_DUAL_SLOPE = "UnboundedDualSlope"

    @property
    def bounded(self) -> bool:
        return self in (Variant.BOUNDED_DUAL_SLOPE, Variant.BOUNDED_SINGLE_SLOPE)

    @property
    def dual_slope(self) -> bool:
        return self in (Variant.BOUNDED_DUAL_SLOPE, Variant.UNBOUNDED_DUAL_SLOPE)


class DiscontinuousPathLossWarning(UserWarning):
    """The bounded plateau does not meet the near-field slope at ``R_b``."""


@dataclass(frozen=True)
class PathLossModel:
    """Piecewise power-law attenuation.

    Parameters
    ----------
    variant
        Which law to apply. Single-slope variants use ``alpha`` everywhere and
        ignore ``R_c``; unbounded variants have no constant plateau and ignore
        ``R_b``.
    R_b
        Radius of the constant-gain region around the receiver.
    R_c
        Critical distance between near field and far field.
    alpha_c
        Near-field exponent.
    alpha
        Far-field exponent.
    """

    variant: Variant = Variant.BOUNDED_DUAL_SLOPE
    R_b: float = 1.0
    R_c: float = 70.0
    alpha_c: float = 2.5
    alpha: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in ("R_b", "R_c", "alpha_c", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 2:
            raise ValueError("alpha must exceed 2 for the interference to be finite")
        if self.variant.dual_slope and not 2 < self.alpha_c <= self.alpha:
            raise ValueError(
                f"need 2 < alpha_c <= alpha, got alpha_c={self.alpha_c}, alpha={self.alpha}"
            )
        if self.variant.bounded and self.R_b <= 0:
            raise ValueError("R_b must be positive for bounded variants")
        if self.variant.dual_slope and self.R_c <= 0:
            raise ValueError("R_c must be positive for dual-slope variants")
        if self.variant is Variant.BOUNDED_DUAL_SLOPE and self.R_b > self.R_c:
            raise ValueError("need R_b <= R_c")
        if self.variant.bounded and self.R_b != 1.0:
            warnings.warn(
                f"R_b={self.R_b} m: the constant plateau does not meet the "
                "near-field slope at R_b, attenuation is discontinuous there",
                DiscontinuousPathLossWarning,
                stacklevel=3,
            )

    @classmethod
    def reference(cls, variant: Variant | str = Variant.BOUNDED_DUAL_SLOPE) -> "PathLossModel":
        """Numerical-results parameter set: R_b=1 m, R_c=70 m, alpha_c=2.5, alpha=4."""
        return cls(Variant(variant), R_b=1.0, R_c=70.0, alpha_c=2.5, alpha=4.0)

    @property
    def tau(self) -> float:
        """Far-field scale ``R_c**(alpha - alpha_c)`` that keeps the law continuous at R_c."""
        return self.R_c ** (self.alpha - self.alpha_c)

    @property
    def bounded_radius(self) -> float:
        return self.R_b if self.variant.bounded else 0.0

    @property
    def near_exponent(self) -> float:
        return self.alpha_c if self.variant.dual_slope else self.alpha

    def breakpoints(self) -> tuple[float, ...]:
        """Distances at which the law changes form, ascending."""
        pts = []
        if self.variant.bounded:
            pts.append(self.R_b)
        if self.variant.dual_slope and (not pts or self.R_c > pts[-1]):
            pts.append(self.R_c)
        return tuple(pts)

    def far_field(self) -> tuple[float, float]:
        """``(k, exponent)`` such that attenuation is ``k * d**-exponent`` beyond the last breakpoint."""
        if self.variant.dual_slope:
            return self.tau, self.alpha
        return 1.0, self.alpha

    def attenuation(self, d):
        return attenuation(self, d)


def _scalar_attenuation(model: PathLossModel, d: float) -> float:
    if not (d >= 0 and math.isfinite(d)):
        raise ValueError("distance must be finite and non-negative")
    v = model.variant
    if v.bounded:
        if d <= model.R_b:
            return 1.0
    elif d == 0:
        raise ValueError("unbounded path loss is singular at d = 0")
    if v.dual_slope:
        if d <= model.R_c:
            return d ** -model.alpha_c
        return model.tau * d ** -model.alpha
    return d ** -model.alpha


def attenuation(model: PathLossModel, d):
    """Power gain at distance ``d`` (scalar or array, meters).

    Returns a float for scalar input and an ndarray otherwise.
    """
    if isinstance(d, (float, int)):
        return _scalar_attenuation(model, float(d))
    arr = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("distance must be finite and non-negative")
    if not model.variant.bounded and np.any(arr == 0):
        raise ValueError("unbounded path loss is singular at d = 0")

    v = model.variant
    with np.errstate(divide="ignore"):
        if v is Variant.UNBOUNDED_SINGLE_SLOPE:
            out = arr ** -model.alpha
        elif v is Variant.BOUNDED_SINGLE_SLOPE:
            out = np.where(arr <= model.R_b, 1.0, np.maximum(arr, model.R_b) ** -model.alpha)
        elif v is Variant.UNBOUNDED_DUAL_SLOPE:
            out = np.where(arr <= model.R_c, arr ** -model.alpha_c, model.tau * arr ** -model.alpha)
        else:
            safe = np.maximum(arr, model.R_b)
            out = np.where(
                arr <= model.R_b,
                1.0,
                np.where(arr <= model.R_c, safe ** -model.alpha_c, model.tau * safe ** -model.alpha),
            )
    if out.ndim == 0:
        return float(out)
    return out
