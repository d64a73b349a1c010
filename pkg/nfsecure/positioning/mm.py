"""
Per-antenna position update by majorization-minimization.

With the beamformer V and the auxiliaries (P, Q_U, Q_E) fixed, the secrecy
objective depends on the position t_m of antenna m only through the
noise-scaled columns h = h(t_m) and z = z(t_m):

    f4(t_m) = h^H D_U h + 2 Re{h^H r_U} + z^H D_E z + 2 Re{z^H r_E}

f4 is majorized by replacing D with zeta_max * I, leaving the phase-only
objective f5; f5 in turn is majorized by an isotropic quadratic with
curvature delta, and the resulting QP is solved over the box and the
linearised minimum-distance constraints.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from nfsecure.beamforming.wmmse import block_auxiliaries
from nfsecure.channel import (
    AntennaLayout,
    MovingRegion,
    ReceiverGeometry,
    channel_column,
    channel_columns,
    fresnel_distance,
    receiver_positions,
    wavenumber,
)
from nfsecure.channel.propagation import ChannelModel
from nfsecure.errors import NumericalError
from .qp import linearize_min_distance, solve_position_qp

logger = logging.getLogger(__name__)

POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 200
MAX_DELTA_DOUBLINGS = 30
MAX_SAFEGUARD_HALVINGS = 30
MAX_STEP_EXPANSIONS = 24


@dataclass(frozen=True)
class PositionContext:
    """Receivers and propagation model the positions are optimised under."""
    user: ReceiverGeometry
    eavesdropper: Optional[ReceiverGeometry]
    wavelength: float
    model: ChannelModel = "near"

    def scaled_channels(self, layout: AntennaLayout):
        """(H / sigma_U, Z / sigma_E) for a layout; Z is None without an eavesdropper."""
        Ht = channel_columns(
            layout.positions, receiver_positions(self.user), self.wavelength, self.model
        ) / np.sqrt(self.user.noise_variance)
        if self.eavesdropper is None:
            return Ht, None
        Zt = channel_columns(
            layout.positions, receiver_positions(self.eavesdropper), self.wavelength, self.model
        ) / np.sqrt(self.eavesdropper.noise_variance)
        return Ht, Zt


@dataclass(frozen=True)
class PositionSubproblem:
    m: int
    D_U: np.ndarray
    r_U: np.ndarray
    D_E: Optional[np.ndarray]
    r_E: Optional[np.ndarray]
    anchor: np.ndarray
    context: PositionContext
    region: MovingRegion

    @property
    def has_eavesdropper(self) -> bool:
        return self.context.eavesdropper is not None

    def user_column(self, t) -> np.ndarray:
        ctx = self.context
        col = channel_column(t, receiver_positions(ctx.user), ctx.wavelength, ctx.model)
        return col / np.sqrt(ctx.user.noise_variance)

    def eve_column(self, t) -> np.ndarray:
        ctx = self.context
        col = channel_column(t, receiver_positions(ctx.eavesdropper), ctx.wavelength, ctx.model)
        return col / np.sqrt(ctx.eavesdropper.noise_variance)

    def at(self, t) -> "PositionSubproblem":
        return replace(self, anchor=np.asarray(t, dtype=float).copy())


@dataclass
class SurrogateModel:
    """Quadratic upper model (delta/2)||t - t0||^2 + g . (t - t0) of f5 at t0."""
    zeta_U: float
    zeta_E: float
    tau_U: np.ndarray
    tau_E: Optional[np.ndarray]
    delta: float
    grad: np.ndarray
    anchor: np.ndarray

    @property
    def linear(self) -> np.ndarray:
        return self.grad - self.delta * self.anchor


@dataclass
class PositionUpdate:
    point: np.ndarray
    f4_trace: list = field(default_factory=list)
    iterations: int = 0
    infeasible_steps: int = 0


@dataclass
class SweepResult:
    layout: AntennaLayout
    updates: list = field(default_factory=list)
    rollbacks: list = field(default_factory=list)


# ----------------------------
# Subproblem assembly
# ----------------------------

def build_subproblem(V, Ht, Zt, P, Q_U, Q_E, layout: AntennaLayout, m: int, context: PositionContext) -> PositionSubproblem:
    """
    Coefficients of f4 for antenna m:
      C_mat = P Q_U P^H, B = P Q_U V^H, D_U = ||v_m||^2 C_mat,
      r_U = C_mat (sum_{i != m} h_i v_i) v_m^H - b_m,
      D_E = ||v_m||^2 Q_E, r_E = Q_E (sum_{i != m} z_i v_i) v_m^H,
    with v_i the i-th row of V.
    """
    V = np.asarray(V)
    others = np.array([i for i in range(V.shape[0]) if i != m], dtype=int)
    v_m = V[m]
    weight = float(np.real(np.vdot(v_m, v_m)))

    C_mat = P @ Q_U @ P.conj().T
    C_mat = 0.5 * (C_mat + C_mat.conj().T)
    b_m = P @ Q_U @ V[m].conj()
    S_U = Ht[:, others] @ V[others]
    r_U = C_mat @ S_U @ v_m.conj() - b_m

    D_E = r_E = None
    if context.eavesdropper is not None:
        Q_E = 0.5 * (Q_E + Q_E.conj().T)
        S_E = Zt[:, others] @ V[others]
        D_E = weight * Q_E
        r_E = Q_E @ S_E @ v_m.conj()

    return PositionSubproblem(
        m=m,
        D_U=weight * C_mat,
        r_U=r_U,
        D_E=D_E,
        r_E=r_E,
        anchor=np.array(layout.positions[m], dtype=float),
        context=context,
        region=layout.region,
    )


def _quad_linear(col, D, r) -> float:
    return float(np.real(np.vdot(col, D @ col)) + 2.0 * np.real(np.vdot(col, r)))


def f4_value(sub: PositionSubproblem, t) -> float:
    value = _quad_linear(sub.user_column(t), sub.D_U, sub.r_U)
    if sub.has_eavesdropper:
        value += _quad_linear(sub.eve_column(t), sub.D_E, sub.r_E)
    return value


# ----------------------------
# Eigenvalue majorizer
# ----------------------------

def surrogate_phi(D: np.ndarray, tol: float = POWER_ITER_TOL, max_iters: int = POWER_ITER_MAX):
    """
    Largest eigenvalue of a Hermitian D by shifted power iteration.
    Returns (zeta_max, zeta_max * I). The Rayleigh quotient is lifted by the
    residual norm so that zeta_max * I - D stays PSD.
    """
    D = 0.5 * (D + D.conj().T)
    n = D.shape[0]
    diag = np.real(np.diag(D))
    radius = np.sum(np.abs(D), axis=1) - np.abs(np.diag(D))
    lower = float(np.min(diag - radius))
    shift = -lower if lower < 0 else 0.0
    A = D + shift * np.eye(n)

    x = np.arange(1, n + 1) + np.exp(1j * np.arange(n))
    x = x / np.linalg.norm(x)
    zeta = float(np.real(np.vdot(x, A @ x)))
    converged = False
    for _ in range(max_iters):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            converged = True
            break
        x = y / norm
        new = float(np.real(np.vdot(x, A @ x)))
        if abs(new - zeta) <= tol * max(1.0, abs(new)):
            zeta = new
            converged = True
            break
        zeta = new

    if converged:
        residual = float(np.linalg.norm(A @ x - zeta * x))
        zeta = zeta - shift + residual
    else:
        logger.debug("power iteration did not converge; using eigvalsh")
        zeta = float(np.linalg.eigvalsh(D)[-1])
    return zeta, zeta * np.eye(n)


def tau_vectors(sub: PositionSubproblem, Phi_U, Phi_E):
    """tau = r - (Phi - D) c(t0) for c = h on the user side and z on the eavesdropper side."""
    t0 = sub.anchor
    tau_U = sub.r_U - (Phi_U - sub.D_U) @ sub.user_column(t0)
    tau_E = None
    if sub.has_eavesdropper:
        tau_E = sub.r_E - (Phi_E - sub.D_E) @ sub.eve_column(t0)
    return tau_U, tau_E


def surrogate_value(sub: PositionSubproblem, Phi_U, Phi_E, tau_U, tau_E, t) -> float:
    """
    Eigenvalue majorizer of f4 at t with exact channel columns:
      c^H Phi c + 2 Re{c^H tau} + c0^H (Phi - D) c0, summed over both receivers.
    """
    def side(col, col0, Phi, D, tau):
        return (
            float(np.real(np.vdot(col, Phi @ col)))
            + 2.0 * float(np.real(np.vdot(col, tau)))
            + float(np.real(np.vdot(col0, (Phi - D) @ col0)))
        )

    t0 = sub.anchor
    value = side(sub.user_column(t), sub.user_column(t0), Phi_U, sub.D_U, tau_U)
    if sub.has_eavesdropper:
        value += side(sub.eve_column(t), sub.eve_column(t0), Phi_E, sub.D_E, tau_E)
    return value


# ----------------------------
# Phase objective f5
# ----------------------------

def _anchor_gains(sub: PositionSubproblem, geom: ReceiverGeometry) -> np.ndarray:
    ctx = sub.context
    points = receiver_positions(geom)
    if ctx.model == "far":
        dist = np.linalg.norm(points, axis=1)
    else:
        lifted = np.array([0.0, sub.anchor[0], sub.anchor[1]])
        dist = np.linalg.norm(points - lifted, axis=1)
    return ctx.wavelength / (4.0 * np.pi * dist) / np.sqrt(geom.noise_variance)


def _phase_terms(sub: PositionSubproblem, tau_U, tau_E):
    """Frozen amplitudes rho, phase offsets angle(tau) and element polar coordinates."""
    ctx = sub.context
    rho = [_anchor_gains(sub, ctx.user) * np.abs(tau_U)]
    offset = [np.angle(tau_U)]
    polar = [ctx.user.element_polar]
    if sub.has_eavesdropper:
        rho.append(_anchor_gains(sub, ctx.eavesdropper) * np.abs(tau_E))
        offset.append(np.angle(tau_E))
        polar.append(ctx.eavesdropper.element_polar)
    return np.concatenate(rho), np.concatenate(offset), np.vstack(polar)


def _gamma(model: ChannelModel, polar: np.ndarray, t):
    """
    Distance model gamma(t) per element with gradient (n, 2) and Hessian (n, 2, 2).
    Near field uses the Fresnel expansion, far field the plane-wave phase.
    """
    t = np.asarray(t, dtype=float)
    r, theta, phi = polar[:, 0], polar[:, 1], polar[:, 2]
    c = np.column_stack([np.sin(theta) * np.sin(phi), np.cos(phi)])
    u = c @ t
    if model == "far":
        gamma = r - u
        grad = -c
        hess = np.zeros((polar.shape[0], 2, 2))
        return gamma, grad, hess
    gamma = fresnel_distance(t, polar)
    grad = -c + (t[None, :] - u[:, None] * c) / r[:, None]
    hess = (np.eye(2)[None, :, :] - c[:, :, None] * c[:, None, :]) / r[:, None, None]
    return gamma, grad, hess


def f5_value(sub: PositionSubproblem, tau_U, tau_E, t) -> float:
    """2 sum rho cos(k gamma(t) + angle(tau)) over every receive element."""
    rho, offset, polar = _phase_terms(sub, tau_U, tau_E)
    k = wavenumber(sub.context.wavelength)
    gamma, _, _ = _gamma(sub.context.model, polar, t)
    return float(2.0 * np.sum(rho * np.cos(k * gamma + offset)))


def f5_gradient(sub: PositionSubproblem, tau_U, tau_E, t) -> np.ndarray:
    rho, offset, polar = _phase_terms(sub, tau_U, tau_E)
    k = wavenumber(sub.context.wavelength)
    gamma, grad, _ = _gamma(sub.context.model, polar, t)
    weight = -2.0 * k * rho * np.sin(k * gamma + offset)
    return weight @ grad


def f5_hessian(sub: PositionSubproblem, tau_U, tau_E, t) -> np.ndarray:
    rho, offset, polar = _phase_terms(sub, tau_U, tau_E)
    k = wavenumber(sub.context.wavelength)
    gamma, grad, hess = _gamma(sub.context.model, polar, t)
    phase = k * gamma + offset
    outer = grad[:, :, None] * grad[:, None, :]
    H = -2.0 * k * k * np.einsum("n,nij->ij", rho * np.cos(phase), outer)
    H -= 2.0 * k * np.einsum("n,nij->ij", rho * np.sin(phase), hess)
    return 0.5 * (H + H.T)


def delta_bound(sub: PositionSubproblem, tau_U, tau_E) -> float:
    """
    Curvature bound of f5 over the whole moving region:
      delta = 2 k^2 sum(rho) G^2 + 2 k sum(rho) (2 / r_min),
    G = 1 + 2 rho_region / r_min bounding ||grad gamma||. Doubled while it
    fails to dominate the Hessian at the anchor.
    """
    rho, _, polar = _phase_terms(sub, tau_U, tau_E)
    total = float(np.sum(rho))
    if total <= 0.0:
        return 0.0
    k = wavenumber(sub.context.wavelength)
    r_min = float(np.min(polar[:, 0]))
    if sub.context.model == "far":
        delta = 2.0 * k * k * total
    else:
        G = 1.0 + 2.0 * sub.region.half_diagonal / r_min
        delta = 2.0 * k * k * total * G * G + 2.0 * k * total * (2.0 / r_min)

    H = f5_hessian(sub, tau_U, tau_E, sub.anchor)
    for _ in range(MAX_DELTA_DOUBLINGS):
        if np.linalg.eigvalsh(delta * np.eye(2) - H)[0] >= -1e-12 * delta:
            return delta
        delta *= 2.0
    raise NumericalError("Curvature bound failed to dominate the f5 Hessian after 30 doublings.")


def build_surrogate(sub: PositionSubproblem) -> SurrogateModel:
    zeta_U, Phi_U = surrogate_phi(sub.D_U)
    zeta_E, Phi_E = (0.0, None)
    if sub.has_eavesdropper:
        zeta_E, Phi_E = surrogate_phi(sub.D_E)
    tau_U, tau_E = tau_vectors(sub, Phi_U, Phi_E)
    delta = delta_bound(sub, tau_U, tau_E)
    grad = f5_gradient(sub, tau_U, tau_E, sub.anchor)
    return SurrogateModel(
        zeta_U=zeta_U, zeta_E=zeta_E, tau_U=tau_U, tau_E=tau_E,
        delta=delta, grad=grad, anchor=np.array(sub.anchor, dtype=float),
    )


# ----------------------------
# MM iterations
# ----------------------------

def _admissible(point, others: np.ndarray, layout: AntennaLayout) -> bool:
    if not layout.region.contains(point, atol=0.0):
        return False
    if others.size == 0:
        return True
    return bool(np.min(np.linalg.norm(others - point, axis=1)) >= layout.min_spacing)


def _expand_step(sub, t, candidate, f_new, others, layout):
    """
    Doubles a descent step along the MM direction while the exact f4 keeps
    falling and the point stays inside the box and d_min clear of the other
    antennas. Every accepted point lowers f4.
    """
    direction = candidate - t
    for _ in range(MAX_STEP_EXPANSIONS):
        trial = t + 2.0 * direction
        if not _admissible(trial, others, layout):
            break
        f_trial = f4_value(sub, trial)
        if f_trial >= f_new:
            break
        direction, candidate, f_new = trial - t, trial, f_trial
    return candidate, f_new


def optimize_position_m(
    sub: PositionSubproblem,
    layout: AntennaLayout,
    eps2: float = 1e-6,
    t_max: int = 30,
) -> PositionUpdate:
    """
    MM iterations for antenna `sub.m`: eigenvalue majorizer, curvature bound,
    QP over the box and linearised spacing constraints. A QP step that raises
    the exact f4 is halved towards the anchor; one that lowers it is extended
    by doubling while f4 keeps falling.
    """
    m = sub.m
    others = np.delete(layout.positions, m, axis=0)
    t = np.array(sub.anchor, dtype=float)
    f_prev = f4_value(sub, t)
    update = PositionUpdate(point=t, f4_trace=[f_prev])

    for it in range(1, t_max + 1):
        sub = sub.at(t)
        model = build_surrogate(sub)
        update.iterations = it
        if model.delta <= 0.0:
            update.f4_trace.append(f_prev)
            break

        halfplanes = [linearize_min_distance(t, other, layout.min_spacing) for other in others]
        qp = solve_position_qp(model.delta, model.linear, layout.region, halfplanes, anchor=t)
        if not qp.feasible:
            update.infeasible_steps += 1
        candidate = qp.point
        f_new = f4_value(sub, candidate)
        for _ in range(MAX_SAFEGUARD_HALVINGS):
            if f_new <= f_prev:
                break
            candidate = t + 0.5 * (candidate - t)
            f_new = f4_value(sub, candidate)
        if f_new > f_prev:
            candidate, f_new = t, f_prev
        elif f_new < f_prev:
            candidate, f_new = _expand_step(sub, t, candidate, f_new, others, layout)

        update.f4_trace.append(f_new)
        change = abs(f_new - f_prev)
        t, f_prev = candidate, f_new
        if change <= eps2 * max(abs(update.f4_trace[-2]), np.finfo(float).tiny):
            break

    update.point = t
    logger.debug("antenna %d: %d MM iterations, f4 %.6g", m, update.iterations, f_prev)
    return update


def _zero_if_absent(Zt, num_antennas):
    return np.zeros((1, num_antennas), dtype=complex) if Zt is None else Zt


def sweep_positions(
    layout: AntennaLayout,
    V: np.ndarray,
    P: np.ndarray,
    Q_U: np.ndarray,
    Q_E: Optional[np.ndarray],
    context: PositionContext,
    eps2: float = 1e-6,
    t_max: int = 30,
    evaluate=None,
) -> SweepResult:
    """
    Ascending-index sweep m = 0..M-1. (P, Q_U, Q_E) are the block-optimal
    auxiliaries for V at `layout`; they are recomputed after every accepted
    move, so each f4 decrease raises the secrecy objective. With `evaluate`
    (layout -> secrecy), a move that lowers it is rolled back.
    """
    result = SweepResult(layout=layout)
    current = layout
    stale = False
    score = evaluate(current) if evaluate is not None else None
    for m in range(current.num_antennas):
        Ht, Zt = context.scaled_channels(current)
        if stale:
            P, Q_U, Q_E = block_auxiliaries(Ht, _zero_if_absent(Zt, current.num_antennas), V)
            stale = False
        sub = build_subproblem(V, Ht, Zt, P, Q_U, Q_E, current, m, context)
        update = optimize_position_m(sub, current, eps2=eps2, t_max=t_max)
        result.updates.append(update)

        candidate = current.with_position(m, update.point)
        if not candidate.is_feasible():
            logger.warning("antenna %d move breaks feasibility; rolled back", m)
            result.rollbacks.append(m)
            continue
        if evaluate is not None:
            new_score = evaluate(candidate)
            if new_score < score - 1e-12 * max(1.0, abs(score)):
                logger.info("antenna %d move lowers secrecy %.6g -> %.6g; rolled back", m, score, new_score)
                result.rollbacks.append(m)
                continue
            score = new_score
        current = candidate
        stale = True

    result.layout = current
    return result
