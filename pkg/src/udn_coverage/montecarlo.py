"""Stochastic-geometry simulation of the downlink seen by a typical UE.

Each trial drops BSs and UEs as independent PPPs on a disk centred on the
typical UE at the origin, associates every UE with its nearest BS, switches
off BSs whose Voronoi cell holds no UE, draws Rayleigh fading and records
whether the SIR clears the threshold.

Randomness is keyed by ``(master_seed, trial_index)`` only, so estimates do
not depend on how trials are split across worker processes.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .analysis import (
    CoverageResult,
    Method,
    NetworkScenario,
    active_probability,
    ase_from_coverage,
)
from .pathloss import PathLossModel, attenuation

GENERATOR = f"numpy PCG64 via SeedSequence(master_seed, spawn_key=(trial, attempt)) numpy=={np.__version__}"
LAMBDA_B_FLOOR = 1e-10
MAX_EXPECTED_POINTS = 1e7
Z95 = 1.959963984540054

_CHUNK = 2048
_BRUTE_FORCE_UES = 32
_MAX_ATTEMPTS = 1000
_FLAGGED_LIMIT = 0.01


class LoadMode(str, enum.Enum):
    EXACT_VORONOI = "ExactVoronoi"
    INDEPENDENT_THINNING = "IndependentThinning"


class ResourceLimitError(RuntimeError):
    """A realization would need more points than the configured cap."""


class EdgeEffectError(RuntimeError):
    """Too many trials had their serving BS close to the window edge."""


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    ``window_radius=None`` selects the radius automatically, see
    :func:`auto_window_radius`. ``workers`` only controls parallelism and
    never changes results.
    """

    trials: int = 20_000
    master_seed: int = 0
    window_radius: float | None = None
    load_mode: LoadMode = LoadMode.EXACT_VORONOI
    min_expected_bs: int = 500
    workers: int = 1
    max_expected_points: float = MAX_EXPECTED_POINTS

    def __post_init__(self):
        object.__setattr__(self, "load_mode", LoadMode(self.load_mode))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError("window_radius must be positive")
        if self.min_expected_bs < 1:
            raise ValueError("min_expected_bs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class Realization:
    bs_points: np.ndarray
    ue_points: np.ndarray
    active_mask: np.ndarray
    serving_index: int
    window_radius: float
    resamples: int = 0

    def __eq__(self, other):
        if not isinstance(other, Realization):
            return NotImplemented
        return (
            self.serving_index == other.serving_index
            and self.window_radius == other.window_radius
            and self.resamples == other.resamples
            and np.array_equal(self.bs_points, other.bs_points)
            and np.array_equal(self.ue_points, other.ue_points)
            and np.array_equal(self.active_mask, other.active_mask)
        )

    @property
    def serving_distance(self) -> float:
        return float(np.hypot(*self.bs_points[self.serving_index]))


@dataclass(frozen=True)
class SimulationEstimate:
    coverage: CoverageResult
    p_active: float
    ase: float
    trials: int
    resampled: int
    flagged: int
    window_radius: float


def trial_streams(master_seed: int, trial_index: int, attempt: int = 0) -> list[np.random.Generator]:
    """Four independent generators (BS, UE, load, fading) for one trial attempt."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index, attempt))
    return [np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(4)]


def sample_ppp(
    density: float,
    radius: float,
    rng: np.random.Generator,
    max_expected: float = MAX_EXPECTED_POINTS,
) -> np.ndarray:
    """Homogeneous PPP on the disk of ``radius`` centred on the origin.

    Points are generated outward: squared radii are partial sums of
    exponential gaps of rate ``density*pi``. The result is ordered by distance
    from the origin and, for a given generator state, its restriction to a
    smaller disk does not depend on ``radius``.

    Returns
    -------
    ndarray of shape (n, 2)
    """
    if not density >= 0 or not math.isfinite(density):
        raise ValueError("density must be finite and non-negative")
    if not radius > 0:
        raise ValueError("radius must be positive")
    expected = density * math.pi * radius * radius
    if expected > max_expected:
        raise ResourceLimitError(f"expected {expected:.3g} points exceeds the cap of {max_expected:.3g}")
    if density == 0:
        return np.empty((0, 2))

    rate = density * math.pi
    r2_max = radius * radius
    r2_chunks, angle_chunks = [], []
    last = 0.0
    while True:
        r2 = last + np.cumsum(rng.standard_exponential(_CHUNK)) / rate
        angles = rng.random(_CHUNK) * (2.0 * math.pi)
        if r2[-1] > r2_max:
            keep = int(np.searchsorted(r2, r2_max, side="right"))
            r2_chunks.append(r2[:keep])
            angle_chunks.append(angles[:keep])
            break
        r2_chunks.append(r2)
        angle_chunks.append(angles)
        last = r2[-1]
    r = np.sqrt(np.concatenate(r2_chunks))
    theta = np.concatenate(angle_chunks)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def auto_window_radius(model: PathLossModel, lambda_b: float, min_expected_bs: int = 500) -> float:
    """Largest of ``3 R_c``, the radius holding ``min_expected_bs`` BSs on average, and ``10/sqrt(lambda_b)``."""
    near = 3.0 * model.R_c if model.variant.dual_slope else 3.0 * model.bounded_radius
    return max(near, math.sqrt(min_expected_bs / (math.pi * lambda_b)), 10.0 / math.sqrt(lambda_b))


def window_radius_for(model: PathLossModel, scenario: NetworkScenario, config: SimConfig) -> float:
    if config.window_radius is None:
        return auto_window_radius(model, scenario.lambda_b, config.min_expected_bs)
    if model.variant.dual_slope and config.window_radius < 3.0 * model.R_c:
        raise ValueError(f"window_radius must be at least 3*R_c = {3.0 * model.R_c} m")
    return float(config.window_radius)


def _nearest(bs: np.ndarray, ue: np.ndarray) -> np.ndarray:
    # building a tree over many BSs costs more than a few direct scans
    if len(ue) <= _BRUTE_FORCE_UES:
        d2 = (ue[:, None, 0] - bs[None, :, 0]) ** 2 + (ue[:, None, 1] - bs[None, :, 1]) ** 2
        return np.argmin(d2, axis=1)
    return cKDTree(bs).query(ue)[1]


def _realize(model, scenario, config, trial_index, radius):
    """Return the realization together with the fading generator of the accepted attempt."""
    if scenario.lambda_b < LAMBDA_B_FLOOR:
        raise ValueError(f"lambda_b below the simulation floor of {LAMBDA_B_FLOOR} per m^2")
    for attempt in range(_MAX_ATTEMPTS):
        bs_rng, ue_rng, load_rng, fading_rng = trial_streams(config.master_seed, trial_index, attempt)
        bs = sample_ppp(scenario.lambda_b, radius, bs_rng, config.max_expected_points)
        if len(bs) > 0:
            break
    else:
        raise RuntimeError(f"trial {trial_index}: no BS drawn in {_MAX_ATTEMPTS} attempts")

    # sample_ppp orders points outward, so BS 0 is nearest to the origin
    serving = 0
    n = len(bs)
    ue = np.empty((0, 2))
    if scenario.full_load:
        active = np.ones(n, dtype=bool)
    elif config.load_mode is LoadMode.EXACT_VORONOI:
        ue = sample_ppp(scenario.lambda_u, radius, ue_rng, config.max_expected_points)
        active = np.zeros(n, dtype=bool)
        if len(ue):
            active[_nearest(bs, ue)] = True
    else:
        active = load_rng.random(n) < active_probability(scenario)
    active[serving] = True
    real = Realization(bs, ue, active, serving, radius, resamples=attempt)
    return real, fading_rng


def build_realization(
    model: PathLossModel, scenario: NetworkScenario, config: SimConfig, trial_index: int
) -> Realization:
    """Deterministic realization for ``(config.master_seed, trial_index)``."""
    radius = window_radius_for(model, scenario, config)
    return _realize(model, scenario, config, trial_index, radius)[0]


def sample_sir(realization: Realization, model: PathLossModel, rng: np.random.Generator) -> float:
    """SIR of the typical UE with unit-mean exponential fading power on every link.

    Returns ``math.inf`` when no other BS transmits.
    """
    active = np.flatnonzero(realization.active_mask)
    s = realization.serving_index
    # serving link first so the draw order is fixed
    order = np.concatenate(([s], active[active != s]))
    pts = realization.bs_points[order]
    gains = attenuation(model, np.hypot(pts[:, 0], pts[:, 1]))
    fading = rng.standard_exponential(len(order))
    signal = fading[0] * gains[0]
    if len(order) == 1:
        return math.inf
    interference = float(np.dot(fading[1:], gains[1:]))
    if interference == 0.0:
        return math.inf
    return float(signal / interference)


def _run_trials(model, scenario, config, radius, start, stop):
    covered = active_inner = counted_inner = resampled = flagged = 0
    T = scenario.T
    for i in range(start, stop):
        real, fading_rng = _realize(model, scenario, config, i, radius)
        resampled += real.resamples
        if real.serving_distance > radius / 3.0:
            flagged += 1
        if sample_sir(real, model, fading_rng) > T:
            covered += 1
        # activity statistics away from the window edge, typical UE's server excluded
        bs = real.bs_points
        inner = np.hypot(bs[:, 0], bs[:, 1]) <= radius / 2.0
        inner[real.serving_index] = False
        counted_inner += int(inner.sum())
        active_inner += int(real.active_mask[inner].sum())
    return covered, active_inner, counted_inner, resampled, flagged


def _chunks(trials: int, pieces: int):
    size = -(-trials // pieces)
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def estimate_coverage(model: PathLossModel, scenario: NetworkScenario, config: SimConfig) -> SimulationEstimate:
    """Monte Carlo coverage estimate with a normal-approximation 95% interval.

    Also returns the empirical active-BS fraction and the ASE computed from
    it. Raises :class:`EdgeEffectError` when more than 1% of trials have a
    serving BS beyond a third of the window radius.
    """
    radius = window_radius_for(model, scenario, config)
    if scenario.lambda_b < LAMBDA_B_FLOOR:
        raise ValueError(f"lambda_b below the simulation floor of {LAMBDA_B_FLOOR} per m^2")
    if config.workers == 1:
        tallies = [_run_trials(model, scenario, config, radius, 0, config.trials)]
    else:
        spans = _chunks(config.trials, config.workers * 4)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_trials, model, scenario, config, radius, a, b) for a, b in spans]
            tallies = [f.result() for f in futures]
    covered, active_inner, counted_inner, resampled, flagged = (sum(col) for col in zip(*tallies))

    n = config.trials
    if flagged > _FLAGGED_LIMIT * n:
        raise EdgeEffectError(
            f"{flagged} of {n} trials had the serving BS beyond radius/3; enlarge the window"
        )
    p_hat = covered / n
    half_width = Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n)
    if scenario.full_load:
        p_active = 1.0
    elif counted_inner:
        p_active = active_inner / counted_inner
    else:
        p_active = active_probability(scenario)
    result = CoverageResult(p_hat, Method.MONTE_CARLO, half_width)
    return SimulationEstimate(
        coverage=result,
        p_active=p_active,
        ase=ase_from_coverage(scenario, p_hat, p_active),
        trials=n,
        resampled=resampled,
        flagged=flagged,
        window_radius=radius,
    )
