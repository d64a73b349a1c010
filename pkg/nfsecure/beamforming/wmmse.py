"""
Fully-digital secrecy beamforming by block coordinate descent on the
weighted-MMSE reformulation. All channels are noise-normalised (H / sigma_U,
Z / sigma_E) and every objective is in nats; conversion to bits happens only
in the reported trace.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from nfsecure.errors import NumericalError, SingularSystemError
from .rates import log_det_gram

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)
RIDGE = 1e-12
MAX_DOUBLINGS = 60
MAX_BISECTIONS = 300
POWER_RTOL = 1e-12


@dataclass
class WmmseState:
    P: np.ndarray
    Q_U: np.ndarray
    Q_E: np.ndarray
    mu: float
    W: np.ndarray


@dataclass
class WmmseResult:
    W: np.ndarray
    state: WmmseState
    secrecy_trace: list = field(default_factory=list)  # bits/s/Hz
    objective_trace: list = field(default_factory=list)  # nats
    iterations: int = 0
    converged: bool = False


def _herm(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def _inv_pd(X: np.ndarray) -> np.ndarray:
    X = _herm(X)
    try:
        factor = scipy.linalg.cho_factor(X, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Weight matrix is not positive definite.") from exc
    return _herm(scipy.linalg.cho_solve(factor, np.eye(X.shape[0]), check_finite=False))


def _logdet_pd(X: np.ndarray) -> float:
    sign, value = np.linalg.slogdet(_herm(X))
    if np.real(sign) <= 0:
        raise NumericalError("Weight matrix is not positive definite.")
    return float(value)


def secrecy_nats(Ht: np.ndarray, Zt: np.ndarray, W: np.ndarray) -> float:
    """Unclamped ln det(I + H~WW^H H~^H) - ln det(I + Z~WW^H Z~^H)."""
    return log_det_gram(Ht @ W) - log_det_gram(Zt @ W)


def secrecy_bits(Ht: np.ndarray, Zt: np.ndarray, W: np.ndarray) -> float:
    return max(secrecy_nats(Ht, Zt, W) / LN2, 0.0)


# ----------------------------
# Block updates
# ----------------------------

def mse_matrix(P: np.ndarray, W: np.ndarray, Ht: np.ndarray) -> np.ndarray:
    """E(P, W) = (I - P^H H~ W)(I - P^H H~ W)^H + P^H P."""
    K = W.shape[1]
    err = np.eye(K) - P.conj().T @ Ht @ W
    return _herm(err @ err.conj().T + P.conj().T @ P)


def update_receive_filter(Ht: np.ndarray, W: np.ndarray) -> np.ndarray:
    """P = (I + H~ W W^H H~^H)^-1 H~ W."""
    HW = Ht @ W
    system = np.eye(Ht.shape[0]) + HW @ HW.conj().T
    return scipy.linalg.solve(_herm(system), HW, assume_a="pos", check_finite=False)


def update_weights(P: np.ndarray, W: np.ndarray, Ht: np.ndarray, Zt: np.ndarray):
    """Q_U = E(P, W)^-1 and Q_E = (I + Z~ W W^H Z~^H)^-1."""
    Q_U = _inv_pd(mse_matrix(P, W, Ht))
    ZW = Zt @ W
    Q_E = _inv_pd(np.eye(Zt.shape[0]) + ZW @ ZW.conj().T)
    return Q_U, Q_E


def block_auxiliaries(Ht: np.ndarray, Zt: np.ndarray, V: np.ndarray):
    """Block-optimal (P, Q_U, Q_E) for a fixed beamformer."""
    P = update_receive_filter(Ht, V)
    Q_U, Q_E = update_weights(P, V, Ht, Zt)
    return P, Q_U, Q_E


def _w_system(P, Q_U, Q_E, Ht, Zt):
    HP = Ht.conj().T @ P
    A = HP @ Q_U @ HP.conj().T + Zt.conj().T @ Q_E @ Zt
    rhs = HP @ Q_U.conj().T
    return _herm(A), rhs


def solve_w_given_mu(P, Q_U, Q_E, Ht, Zt, mu: float, ridge: float = 0.0) -> np.ndarray:
    """
    W(mu) = (H~^H P Q_U P^H H~ + mu I + Z~^H Q_E Z~)^-1 H~^H P Q_U^H.

    Raises SingularSystemError when the regularised matrix is numerically
    singular (only possible at mu = 0).
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative.")
    A, rhs = _w_system(P, Q_U, Q_E, Ht, Zt)
    return _solve_shifted(A, rhs, mu + ridge)


def _solve_shifted(A: np.ndarray, rhs: np.ndarray, shift: float) -> np.ndarray:
    M = A.shape[0]
    system = A + shift * np.eye(M)
    scale = max(np.real(np.trace(A)) / M, np.finfo(float).tiny)
    try:
        factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("Beamformer system is singular at mu = 0; needs positive mu.") from exc
    pivots = np.abs(np.diag(factor[0])) ** 2
    if pivots.min() <= 1e-13 * scale:
        raise SingularSystemError("Beamformer system is singular at mu = 0; needs positive mu.")
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def _power(W: np.ndarray) -> float:
    return float(np.real(np.vdot(W, W)))


def bisect_mu(P, Q_U, Q_E, Ht, Zt, power_budget: float):
    """
    Dual variable for the power constraint. Returns (mu*, W(mu*)) with
    mu* = 0 when W(0) is feasible, else |tr(W W^H) - P_B| <= 1e-8 P_B.
    """
    if power_budget <= 0:
        raise ValueError("Power budget must be positive.")
    A, rhs = _w_system(P, Q_U, Q_E, Ht, Zt)
    M = A.shape[0]

    try:
        W0 = _solve_shifted(A, rhs, 0.0)
    except SingularSystemError:
        ridge = RIDGE * max(np.real(np.trace(A)) / M, 1.0)
        logger.debug("mu = 0 system singular, retrying with ridge %.3g", ridge)
        W0 = _solve_shifted(A, rhs, ridge)
    if _power(W0) <= power_budget:
        return 0.0, W0

    # Bracket: power(mu) decreases monotonically in mu
    lo, hi = 0.0, 1.0
    W_hi = _solve_shifted(A, rhs, hi)
    doublings = 0
    while _power(W_hi) >= power_budget:
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise NumericalError(
                f"Could not bracket mu: power {_power(W_hi):.6g} W still above budget "
                f"{power_budget:.6g} W at mu = {hi:.3g}."
            )
        W_hi = _solve_shifted(A, rhs, hi)

    best_mu, best_W = hi, W_hi
    for _ in range(MAX_BISECTIONS):
        if abs(_power(best_W) - power_budget) <= POWER_RTOL * power_budget:
            break
        # geometric steps while the bracket spans decades
        if lo == 0.0:
            mid = hi / 16.0
        elif hi / lo > 4.0:
            mid = np.sqrt(lo * hi)
        else:
            mid = 0.5 * (lo + hi)
        W_mid = _solve_shifted(A, rhs, mid)
        if _power(W_mid) > power_budget:
            lo = mid
        else:
            hi, best_mu, best_W = mid, mid, W_mid
        if hi - lo <= 1e-16 * hi:
            break
    else:
        logger.warning("mu bisection hit the iteration cap; returning the feasible end of the bracket")
    return float(best_mu), best_W


def wmmse_objective(P, Q_U, Q_E, W, Ht, Zt) -> float:
    """
    ln det Q_U - tr(Q_U E(P, W)) + K + ln det Q_E - tr(Q_E (I + Z~ W W^H Z~^H)) + L_E
    """
    K = W.shape[1]
    L_E = Zt.shape[0]
    ZW = Zt @ W
    user = _logdet_pd(Q_U) - np.real(np.trace(Q_U @ mse_matrix(P, W, Ht))) + K
    eve = _logdet_pd(Q_E) - np.real(np.trace(Q_E @ (np.eye(L_E) + ZW @ ZW.conj().T))) + L_E
    return float(user + eve)


def initial_beamformer(Ht: np.ndarray, num_streams: int, power_budget: float) -> np.ndarray:
    """Top-K right singular directions of H~, scaled to ||W||_F^2 = P_B."""
    _, _, vh = np.linalg.svd(Ht, full_matrices=True)
    W = vh.conj().T[:, :num_streams]
    return W * np.sqrt(power_budget / _power(W))


def wmmse_fully_digital(
    Ht: np.ndarray,
    Zt: np.ndarray,
    power_budget: float,
    W0: np.ndarray | None = None,
    num_streams: int | None = None,
    tol: float = 1e-6,
    max_iters: int = 300,
) -> WmmseResult:
    """
    BCD sweep P -> (Q_U, Q_E) -> (W, mu) until the relative change of the
    weighted-MMSE objective drops below `tol` or `max_iters` is reached.
    """
    if W0 is None:
        if num_streams is None:
            raise ValueError("Either W0 or num_streams is required.")
        W0 = initial_beamformer(Ht, num_streams, power_budget)
    W = np.array(W0, dtype=complex)
    if _power(W) > power_budget * (1.0 + 1e-8):
        raise ValueError("Initial beamformer violates the power budget.")

    result = WmmseResult(W=W, state=None, secrecy_trace=[secrecy_bits(Ht, Zt, W)])
    prev = None
    change = float("nan")
    state = None
    for it in range(1, max_iters + 1):
        P = update_receive_filter(Ht, W)
        Q_U, Q_E = update_weights(P, W, Ht, Zt)
        mu, W = bisect_mu(P, Q_U, Q_E, Ht, Zt, power_budget)
        state = WmmseState(P=P, Q_U=Q_U, Q_E=Q_E, mu=mu, W=W)

        objective = wmmse_objective(P, Q_U, Q_E, W, Ht, Zt)
        result.objective_trace.append(objective)
        result.secrecy_trace.append(secrecy_bits(Ht, Zt, W))
        result.iterations = it
        if prev is not None:
            change = abs(objective - prev)
            if change <= tol * max(abs(prev), 1e-12):
                result.converged = True
                break
        prev = objective
    else:
        logger.warning(
            "WMMSE stopped at the %d-iteration cap; secrecy %.6g nats, last objective change %.3g",
            max_iters, secrecy_nats(Ht, Zt, W), change,
        )

    result.W = W
    result.state = state
    logger.debug(
        "WMMSE finished after %d iterations, secrecy %.6g bits/s/Hz",
        result.iterations, result.secrecy_trace[-1],
    )
    return result
