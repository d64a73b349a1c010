"""
Alternating optimisation of the beamformers and the antenna positions:
fully-digital WMMSE, hybrid factorisation, then one MM sweep over the
antennas, repeated until the secrecy rate settles.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from nfsecure.beamforming import (
    BeamformerSet,
    RatePair,
    achievable_rate,
    block_auxiliaries,
    hybrid_factorize,
    initial_beamformer,
    secrecy_nats,
    secrecy_rate,
    wmmse_fully_digital,
)
from nfsecure.beamforming.wmmse import LN2
from nfsecure.channel import (
    AntennaLayout,
    MovingRegion,
    ReceiverGeometry,
    lattice_layout,
    near_field_channel,
)
from nfsecure.channel.geometry import SPACING_TOL
from nfsecure.channel.propagation import ChannelModel
from nfsecure.errors import ConfigError, NumericalError, SolveAborted
from nfsecure.positioning import PositionContext, sweep_positions

logger = logging.getLogger(__name__)

LayoutMode = Literal["grid", "random"]

MAX_PLACEMENT_ATTEMPTS = 100_000
# Denominator floor of the relative-change test
ZERO_SECRECY_FLOOR = 1e-12
TRACE_SLACK = 1e-12


@dataclass
class Scene:
    user: ReceiverGeometry
    eavesdropper: Optional[ReceiverGeometry]
    wavelength: float
    region: MovingRegion
    min_spacing: float
    power_budget: float  # W
    num_antennas: int
    num_rf: int
    num_streams: int
    hybrid: bool = True
    optimize_positions: bool = True
    model: ChannelModel = "near"
    layout: Optional[AntennaLayout] = None

    def __post_init__(self):
        if self.power_budget <= 0:
            raise ConfigError("Power budget must be positive.")
        if self.num_streams < 1 or self.num_antennas < 1:
            raise ConfigError("Need at least one antenna and one stream.")
        if self.hybrid and not (self.num_streams <= self.num_rf <= self.num_antennas):
            raise ConfigError(
                f"Hybrid beamforming needs K <= N <= M, got K={self.num_streams}, "
                f"N={self.num_rf}, M={self.num_antennas}."
            )
        if self.num_streams > self.num_antennas:
            raise ConfigError("More streams than antennas.")
        if self.layout is not None and self.layout.num_antennas != self.num_antennas:
            raise ConfigError("Initial layout does not have M antennas.")


@dataclass
class SolveConfig:
    eps1: float = 1e-6
    eps2: float = 1e-6
    eps3: float = 1e-6
    max_iters: int = 300
    mo_max_iters: int = 300
    mm_max_iters: int = 30
    wmmse_tol: float = 1e-6
    wmmse_max_iters: int = 300
    hybrid_eps: float = 1e-6
    hybrid_max_outer: int = 50
    rng_seed: int = 0
    layout_mode: LayoutMode = "random"

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps3", "wmmse_tol", "hybrid_eps"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive.")
        for name in ("max_iters", "mo_max_iters", "mm_max_iters", "wmmse_max_iters", "hybrid_max_outer"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1.")
        if self.layout_mode not in ("grid", "random"):
            raise ConfigError(f"Unknown layout mode {self.layout_mode!r}.")


@dataclass
class SolveResult:
    beamformers: BeamformerSet
    layout: AntennaLayout
    trace: list = field(default_factory=list)  # bits/s/Hz, index 0 is the initial point
    iterations: int = 0
    seconds: float = 0.0
    rates: Optional[RatePair] = None
    converged: bool = False

    @property
    def secrecy(self) -> float:
        return self.rates.secrecy if self.rates is not None else self.trace[-1]


def initialize_layout(num_antennas: int, region: MovingRegion, min_spacing: float, mode: LayoutMode = "grid", rng=None) -> AntennaLayout:
    """
    Feasible starting layout. `grid` centres a ceil(sqrt(M)) lattice with
    spacing A / ceil(sqrt(M)); `random` places antennas one at a time by
    rejection sampling.
    """
    side = int(np.ceil(np.sqrt(num_antennas)))
    if (side - 1) * min_spacing > region.side + SPACING_TOL:
        raise ConfigError(
            f"M={num_antennas} antennas with d_min={min_spacing:.6g} m cannot be packed "
            f"into a {region.side:.6g} m region."
        )
    if mode == "grid":
        return lattice_layout(num_antennas, region.side / side, region, min_spacing)
    if mode != "random":
        raise ConfigError(f"Unknown layout mode {mode!r}.")

    rng = np.random.default_rng() if rng is None else rng
    placed = []
    attempts = 0
    while len(placed) < num_antennas:
        attempts += 1
        if attempts > MAX_PLACEMENT_ATTEMPTS:
            raise ConfigError(
                f"Random placement of M={num_antennas} antennas failed after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts."
            )
        point = rng.uniform(-region.half_width, region.half_width, size=2)
        if placed and np.min(np.linalg.norm(np.array(placed) - point, axis=1)) < min_spacing:
            continue
        placed.append(point)
    return AntennaLayout(np.array(placed), min_spacing, region)


# ----------------------------
# Helpers
# ----------------------------

def _reported(objective: float) -> float:
    # the trace is the clamped rate in bits/s/Hz
    return max(objective / LN2, 0.0)


def _effective_eve(Zt, num_antennas):
    # An absent eavesdropper is a zero channel: Q_E = I and no rate penalty
    return np.zeros((1, num_antennas), dtype=complex) if Zt is None else Zt


def _realize(scene: Scene, config: SolveConfig, W: np.ndarray, analog0=None) -> BeamformerSet:
    if not scene.hybrid:
        return BeamformerSet(power_budget=scene.power_budget, full=W)
    factored = hybrid_factorize(
        W,
        scene.num_rf,
        power_budget=scene.power_budget,
        eps=config.hybrid_eps,
        max_outer=config.hybrid_max_outer,
        eps1=config.eps1,
        t_max=config.mo_max_iters,
        W_A0=analog0,
    )
    return BeamformerSet(
        power_budget=scene.power_budget,
        analog=factored.analog,
        digital=factored.digital,
        full=W,
    )


def evaluate_near_field(scene: Scene, layout: AntennaLayout, V: np.ndarray) -> RatePair:
    """Rates of V under the exact spherical-wave channel."""
    H = near_field_channel(layout, scene.user, scene.wavelength)
    if scene.eavesdropper is None:
        return RatePair(user=achievable_rate(H, V, scene.user.noise_variance), eavesdropper=0.0)
    Z = near_field_channel(layout, scene.eavesdropper, scene.wavelength)
    return secrecy_rate(H, Z, V, scene.user.noise_variance, scene.eavesdropper.noise_variance)


def solve(scene: Scene, config: Optional[SolveConfig] = None, initial: Optional[BeamformerSet] = None, rng=None) -> SolveResult:
    config = config or SolveConfig()
    rng = np.random.default_rng(config.rng_seed) if rng is None else rng
    started = time.perf_counter()

    layout = scene.layout or initialize_layout(
        scene.num_antennas, scene.region, scene.min_spacing, config.layout_mode, rng
    )
    layout.validate()
    context = PositionContext(scene.user, scene.eavesdropper, scene.wavelength, scene.model)
    M = scene.num_antennas

    Ht, Zt = context.scaled_channels(layout)
    Zt = _effective_eve(Zt, M)

    if initial is not None:
        beams = initial.validate()
        W = initial.full if initial.full is not None else initial.effective
    else:
        W = initial_beamformer(Ht, scene.num_streams, scene.power_budget)
        beams = _realize(scene, config, W)

    # acceptance and convergence run on the unclamped objective in nats
    objective = secrecy_nats(Ht, Zt, beams.effective)
    trace = [_reported(objective)]
    result = SolveResult(beamformers=beams, layout=layout, trace=trace)

    try:
        for outer in range(1, config.max_iters + 1):
            previous = objective

            digital = wmmse_fully_digital(
                Ht, Zt, scene.power_budget, W0=W,
                tol=config.wmmse_tol, max_iters=config.wmmse_max_iters,
            )
            W = digital.W
            candidate = _realize(scene, config, W, beams.analog)
            candidate_objective = secrecy_nats(Ht, Zt, candidate.effective)
            if candidate_objective >= objective - TRACE_SLACK:
                beams, objective = candidate, candidate_objective
            else:
                logger.info(
                    "iteration %d: beamformer update lowers secrecy %.6g -> %.6g nats; kept previous",
                    outer, objective, candidate_objective,
                )

            if scene.optimize_positions:
                V = beams.effective
                P, Q_U, Q_E = block_auxiliaries(Ht, Zt, V)

                def evaluate(candidate_layout, V=V):
                    H_c, Z_c = context.scaled_channels(candidate_layout)
                    return secrecy_nats(H_c, _effective_eve(Z_c, M), V)

                sweep = sweep_positions(
                    layout, V, P, Q_U, Q_E, context,
                    eps2=config.eps2, t_max=config.mm_max_iters, evaluate=evaluate,
                )
                layout = sweep.layout
                Ht, Zt = context.scaled_channels(layout)
                Zt = _effective_eve(Zt, M)
                objective = secrecy_nats(Ht, Zt, V)

            trace.append(_reported(objective))
            result.iterations = outer
            if abs(objective - previous) / (abs(previous) + ZERO_SECRECY_FLOOR) <= config.eps3:
                result.converged = True
                break
    except NumericalError as exc:
        raise SolveAborted(f"Solve aborted at iteration {result.iterations + 1}: {exc}", trace) from exc

    beams.validate()
    result.beamformers = beams
    result.layout = layout
    result.rates = evaluate_near_field(scene, layout, beams.effective)
    result.seconds = time.perf_counter() - started
    logger.debug(
        "solve finished: %d iterations, secrecy %.6g bits/s/Hz (near-field %.6g)",
        result.iterations, trace[-1], result.rates.secrecy,
    )
    return result
