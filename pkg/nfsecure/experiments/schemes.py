"""
Scheme dispatch for one Monte Carlo trial.

  proposed  hybrid beamformers, positions optimised (near field)
  fd        fully-digital beamformer, positions optimised
  rpa       hybrid beamformers, random feasible positions kept fixed
  fpaf      hybrid beamformers, fixed lattice spanning the whole region
  fpah      hybrid beamformers, fixed half-wavelength lattice
  ff        hybrid beamformers, positions optimised under the plane-wave
            model, rates evaluated under the near-field channel
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from nfsecure.channel import MovingRegion, ReceiverGeometry, lattice_layout
from nfsecure.errors import ConfigError
from nfsecure.solver import Scene, SolveConfig, initialize_layout, solve
from nfsecure.utils.units import dbm_to_watts
from .config import SCHEMES, ExperimentConfig


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    axis_value: Optional[float]
    trial: int
    secrecy_bps_hz: float
    iterations: int
    seconds: float
    # secrecy per outer iteration (bits/s/Hz) and final (y, z) per antenna
    trace: tuple = field(default=(), compare=False)
    positions: tuple = field(default=(), compare=False)


@dataclass
class ExperimentRecord:
    """All trials of one scheme at one swept value."""
    scheme: str
    axis_value: Optional[float]
    trials: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([t.secrecy_bps_hz for t in self.trials], dtype=float)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.trials else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.values)) if self.trials else float("nan")

    @property
    def minimum(self) -> float:
        return float(np.min(self.values)) if self.trials else float("nan")

    @property
    def maximum(self) -> float:
        return float(np.max(self.values)) if self.trials else float("nan")

    def summary(self) -> dict:
        return {
            "scheme": self.scheme,
            "axis_value": self.axis_value,
            "trials": len(self.trials),
            "mean": self.mean,
            "std": self.std,
            "min": self.minimum,
            "max": self.maximum,
            "mean_iterations": float(np.mean([t.iterations for t in self.trials])) if self.trials else 0.0,
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (master seed, trial); shared by every scheme of a trial."""
    return np.random.default_rng([int(seed), int(trial)])


def receivers(config: ExperimentConfig):
    noise = dbm_to_watts(config.noise_dbm)
    user = ReceiverGeometry.planar_array(
        "user", config.user_r, config.user_theta, config.user_phi,
        num_elements=config.user_elements, wavelength=config.wavelength, noise_variance=noise,
    )
    eve = None
    if config.eavesdropper:
        eve = ReceiverGeometry.planar_array(
            "eavesdropper", config.eve_r, config.eve_theta, config.eve_phi,
            num_elements=config.eve_elements, wavelength=config.wavelength, noise_variance=noise,
        )
    return user, eve


def scheme_layout(config: ExperimentConfig, scheme: str, region: MovingRegion, rng):
    M = config.num_antennas
    if scheme == "fpaf":
        side = int(np.ceil(np.sqrt(M)))
        spacing = region.side / (side - 1) if side > 1 else region.side
        return lattice_layout(M, spacing, region, config.spacing)
    if scheme == "fpah":
        return lattice_layout(M, config.wavelength / 2, region, config.spacing)
    return initialize_layout(M, region, config.spacing, "random", rng)


def build_scene(config: ExperimentConfig, scheme: str, rng) -> Scene:
    if scheme not in SCHEMES:
        raise ConfigError(f"Unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}.")
    region = MovingRegion(config.region_side / 2)
    user, eve = receivers(config)
    return Scene(
        user=user,
        eavesdropper=eve,
        wavelength=config.wavelength,
        region=region,
        min_spacing=config.spacing,
        power_budget=dbm_to_watts(config.power_dbm),
        num_antennas=config.num_antennas,
        num_rf=config.num_rf,
        num_streams=config.num_streams,
        hybrid=scheme != "fd",
        optimize_positions=scheme in ("proposed", "fd", "ff"),
        model="far" if scheme == "ff" else "near",
        layout=scheme_layout(config, scheme, region, rng),
    )


def solve_config(config: ExperimentConfig) -> SolveConfig:
    return SolveConfig(
        eps3=config.eps3,
        max_iters=config.max_iters,
        mo_max_iters=config.mo_max_iters,
        mm_max_iters=config.mm_max_iters,
        rng_seed=config.seed,
    )


def run_scheme(config: ExperimentConfig, scheme: str, rng, trial: int = 0, axis_value=None):
    """Solve one trial of one scheme; returns (TrialRecord, SolveResult)."""
    scene = build_scene(config, scheme, rng)
    result = solve(scene, solve_config(config), rng=rng)
    record = TrialRecord(
        scheme=scheme,
        axis_value=None if axis_value is None else float(axis_value),
        trial=int(trial),
        secrecy_bps_hz=float(result.secrecy),
        iterations=int(result.iterations),
        seconds=float(result.seconds),
        trace=tuple(float(v) for v in result.trace),
        positions=tuple((float(y), float(z)) for y, z in result.layout.positions),
    )
    return record, result
