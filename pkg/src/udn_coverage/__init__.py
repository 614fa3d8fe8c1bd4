"""SIR coverage and area spectral efficiency of dense small-cell networks
under bounded dual-slope path loss."""

__version__ = "0.1.0"

from .analysis import (
    FULL_LOAD,
    CoverageResult,
    Method,
    NetworkScenario,
    active_probability,
    ase,
    ase_bounds,
    ase_limit,
    c_T,
    coverage,
    coverage_asymptotic,
    coverage_bounds,
    coverage_exact,
    coverage_general,
)
from .montecarlo import LoadMode, SimConfig, estimate_coverage
from .pathloss import PathLossModel, Variant, attenuation
from .specfun import ConvergenceError, QuadratureSpec, hyp_F, integrate
from .sweep import SweepSpec, run_sweep

__all__ = [
    "FULL_LOAD",
    "ConvergenceError",
    "CoverageResult",
    "LoadMode",
    "Method",
    "NetworkScenario",
    "PathLossModel",
    "QuadratureSpec",
    "SimConfig",
    "SweepSpec",
    "Variant",
    "active_probability",
    "ase",
    "ase_bounds",
    "ase_limit",
    "attenuation",
    "c_T",
    "coverage",
    "coverage_asymptotic",
    "coverage_bounds",
    "coverage_exact",
    "coverage_general",
    "estimate_coverage",
    "hyp_F",
    "integrate",
    "run_sweep",
]
