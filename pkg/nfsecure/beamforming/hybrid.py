"""
Hybrid factorisation W ~ W_A W_D with a unit-modulus analog stage.

The analog update runs Riemannian conjugate gradient on the complex-circle
manifold. Vectorisation is column-major, vec(W_A W_D) = (W_D^T kron I_M) vec(W_A),
but the Kronecker product is never formed: every f2 quantity is evaluated
in the M x N matrix form.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from nfsecure.errors import NumericalError

logger = logging.getLogger(__name__)

ARMIJO_SHRINK = 0.5
ARMIJO_C = 1e-4
ARMIJO_MAX_BACKTRACKS = 60
MAX_RETRACTION_SHRINKS = 60
COND_LIMIT = 1e12

# A manifold point is a complex vector with |x_i| = 1
ManifoldPoint = np.ndarray


@dataclass
class MoIterate:
    point: np.ndarray
    grad: np.ndarray
    direction: np.ndarray
    step: float = 0.0
    pr_coef: float = 0.0


@dataclass
class MoResult:
    analog: np.ndarray
    cost_trace: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    iterations: int = 0
    last: MoIterate | None = None


@dataclass
class HybridResult:
    analog: np.ndarray
    digital: np.ndarray
    residual_trace: list = field(default_factory=list)
    outer_iterations: int = 0


def _vec(X: np.ndarray) -> np.ndarray:
    return X.reshape(-1, order="F")


def _unvec(x: np.ndarray, shape) -> np.ndarray:
    return x.reshape(shape, order="F")


def on_manifold(x, atol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(np.abs(x) - 1.0) <= atol))


# ----------------------------
# Digital stage
# ----------------------------

def ls_digital(W_A: np.ndarray, W: np.ndarray) -> np.ndarray:
    """W_D = (W_A^H W_A)^-1 W_A^H W."""
    gram = W_A.conj().T @ W_A
    if np.linalg.cond(gram) > COND_LIMIT:
        raise NumericalError("Analog beamformer is rank deficient; least-squares digital stage is ill-posed.")
    return scipy.linalg.solve(gram, W_A.conj().T @ W, assume_a="pos", check_finite=False)


# ----------------------------
# Manifold geometry
# ----------------------------

def f2_value(x: np.ndarray, W_D: np.ndarray, W: np.ndarray) -> float:
    """||W - W_A W_D||_F^2 with W_A = unvec(x)."""
    residual = W - _unvec(x, (W.shape[0], W_D.shape[0])) @ W_D
    return float(np.real(np.vdot(residual, residual)))


def euclidean_gradient_f2(x: np.ndarray, W_D: np.ndarray, W: np.ndarray) -> np.ndarray:
    """vec(2 (W_A W_D - W) W_D^H), the conjugate-Wirtinger gradient times two."""
    W_A = _unvec(x, (W.shape[0], W_D.shape[0]))
    return _vec(2.0 * (W_A @ W_D - W) @ W_D.conj().T)


def riemannian_gradient(x: np.ndarray, eucl_grad: np.ndarray) -> np.ndarray:
    """Projection onto the tangent space: g - Re{g o x*} o x."""
    return eucl_grad - np.real(eucl_grad * x.conj()) * x


def transport(d_prev: np.ndarray, x_new: np.ndarray) -> np.ndarray:
    return d_prev - np.real(d_prev * x_new.conj()) * x_new


def polak_ribiere(grad_new: np.ndarray, grad_old: np.ndarray) -> float:
    """PR+ coefficient; 0 (restart) for a vanishing previous gradient."""
    denom = np.real(np.vdot(grad_old, grad_old))
    if denom <= 0.0:
        return 0.0
    coef = np.real(np.vdot(grad_new, grad_new - grad_old)) / denom
    return float(max(coef, 0.0))


def retract(x: np.ndarray, step: float, direction: np.ndarray):
    """
    Elementwise normalisation of x + beta d. Shrinks beta while any entry
    vanishes; returns (point, beta actually used).
    """
    beta = float(step)
    for _ in range(MAX_RETRACTION_SHRINKS + 1):
        y = x + beta * direction
        mag = np.abs(y)
        if np.all(mag > 1e-300):
            return y / mag, beta
        beta *= ARMIJO_SHRINK
    raise NumericalError("Retraction failed: step keeps hitting the origin.")


def _armijo(x, f_x, slope, direction, cost, beta0):
    beta = beta0
    for _ in range(ARMIJO_MAX_BACKTRACKS):
        candidate, beta = retract(x, beta, direction)
        f_new = cost(candidate)
        if f_new <= f_x + ARMIJO_C * beta * slope and f_new < f_x:
            return candidate, f_new, beta
        beta *= ARMIJO_SHRINK
    return None, f_x, 0.0


def mo_analog(
    W: np.ndarray,
    W_D: np.ndarray,
    x0: np.ndarray,
    eps1: float = 1e-6,
    t_max: int = 300,
) -> MoResult:
    """
    Riemannian conjugate gradient for min_x f2(x) on the complex circle.
    Stops when ||grad f2|| <= eps1, after t_max iterations, or when no
    Armijo step gives a decrease.

    The Armijo backtracking starts from beta0 = 1 / ||W_D||_2^2, not from a
    unit step; the two coincide only when ||W_D||_2 = 1.
    """
    shape = (W.shape[0], W_D.shape[0])
    x = np.array(x0, dtype=complex).reshape(-1)

    def cost(point):
        return f2_value(point, W_D, W)

    # Armijo trial step 1 in curvature-normalised units
    curvature = np.linalg.norm(W_D, 2) ** 2
    beta0 = 1.0 / curvature if curvature > 0 else 1.0

    f_x = cost(x)
    grad = riemannian_gradient(x, euclidean_gradient_f2(x, W_D, W))
    direction = -grad
    result = MoResult(analog=_unvec(x, shape), cost_trace=[f_x], grad_norms=[float(np.linalg.norm(grad))])

    for t in range(t_max):
        if np.linalg.norm(grad) <= eps1:
            break
        slope = float(np.real(np.vdot(grad, direction)))
        if slope >= 0.0:
            direction = -grad
            slope = -float(np.real(np.vdot(grad, grad)))

        x_new, f_new, beta = _armijo(x, f_x, slope, direction, cost, beta0)
        if x_new is None:
            logger.debug("MO stopped at iteration %d: no Armijo decrease", t)
            break

        grad_new = riemannian_gradient(x_new, euclidean_gradient_f2(x_new, W_D, W))
        carried = transport(direction, x_new)
        coef = polak_ribiere(grad_new, grad)
        direction = -grad_new + coef * carried

        x, f_x, grad = x_new, f_new, grad_new
        result.last = MoIterate(point=x, grad=grad, direction=direction, step=beta, pr_coef=coef)
        result.cost_trace.append(f_x)
        result.grad_norms.append(float(np.linalg.norm(grad)))
        result.iterations = t + 1

    result.analog = _unvec(x, shape)
    return result


def initial_analog(W: np.ndarray, num_rf: int) -> np.ndarray:
    """Phases of the first N columns of a complete QR factor of W."""
    M = W.shape[0]
    if num_rf > M:
        raise ValueError(f"N = {num_rf} RF chains exceed M = {M} antennas.")
    q, _ = np.linalg.qr(W, mode="complete")
    block = q[:, :num_rf]
    phase = np.angle(block)
    # exact zeros carry no phase information; angle(0) = 0 keeps them on the circle
    return np.exp(1j * phase)


def hybrid_factorize(
    W: np.ndarray,
    num_rf: int,
    power_budget: float | None = None,
    eps: float = 1e-6,
    max_outer: int = 50,
    eps1: float = 1e-6,
    t_max: int = 300,
    W_A0: np.ndarray | None = None,
) -> HybridResult:
    """
    Alternate the least-squares digital stage and the manifold analog stage
    until the relative residual improvement drops below `eps`. The pair is
    then rescaled so ||W_A W_D||_F^2 = min(||W||_F^2, P_B).
    """
    K = W.shape[1]
    if num_rf < K:
        raise ValueError(f"N = {num_rf} RF chains cannot carry K = {K} streams.")
    W_A = initial_analog(W, num_rf) if W_A0 is None else np.array(W_A0, dtype=complex)
    result = HybridResult(analog=W_A, digital=None)

    prev = None
    for outer in range(1, max_outer + 1):
        W_D = ls_digital(W_A, W)
        mo = mo_analog(W, W_D, _vec(W_A), eps1=eps1, t_max=t_max)
        W_A = mo.analog
        residual = mo.cost_trace[-1]
        result.residual_trace.append(residual)
        result.outer_iterations = outer
        if prev is not None and (prev - residual) <= eps * max(prev, 1e-300):
            break
        prev = residual

    W_D = ls_digital(W_A, W)
    target = np.real(np.vdot(W, W))
    if power_budget is not None:
        target = min(target, power_budget)
    produced = np.real(np.vdot(W_A @ W_D, W_A @ W_D))
    if produced > 0:
        W_D = W_D * np.sqrt(target / produced)

    result.analog = W_A
    result.digital = W_D
    return result
