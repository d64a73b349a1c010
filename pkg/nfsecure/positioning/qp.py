"""
Two-variable convex QP for a single antenna move:

    min (delta/2) ||t||^2 + c . t   s.t.  box, a_i . t >= b_i

The objective is an isotropic quadratic, so the solution is the Euclidean
projection of p = -c/delta onto the feasible polygon.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from nfsecure.channel import MovingRegion
from nfsecure.errors import ConfigError

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-12
MAX_ACTIVE_SET_ITERS = 100


@dataclass(frozen=True)
class HalfPlane:
    """a . t >= b"""
    normal: np.ndarray
    offset: float

    def slack(self, t) -> np.ndarray:
        return np.asarray(t, dtype=float) @ self.normal - self.offset


@dataclass
class QpResult:
    point: np.ndarray
    feasible: bool = True
    active: list = field(default_factory=list)
    iterations: int = 0


def linearize_min_distance(anchor, other, min_spacing: float) -> HalfPlane:
    """
    First-order under-estimator of ||t - t_other|| at the anchor:
    a . (t - t_other) >= d_min with a the unit vector from t_other to the anchor.
    """
    anchor = np.asarray(anchor, dtype=float)
    other = np.asarray(other, dtype=float)
    gap = np.linalg.norm(anchor - other)
    if gap <= FEAS_TOL:
        raise ConfigError("Coincident antennas: the minimum-distance constraint cannot be linearised.")
    a = (anchor - other) / gap
    return HalfPlane(a, float(min_spacing + a @ other))


def box_halfplanes(region: MovingRegion) -> list[HalfPlane]:
    h = region.half_width
    return [
        HalfPlane(np.array([1.0, 0.0]), -h),
        HalfPlane(np.array([-1.0, 0.0]), -h),
        HalfPlane(np.array([0.0, 1.0]), -h),
        HalfPlane(np.array([0.0, -1.0]), -h),
    ]


def _stack(constraints):
    A = np.array([hp.normal for hp in constraints], dtype=float).reshape(-1, 2)
    b = np.array([hp.offset for hp in constraints], dtype=float)
    return A, b


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _feasible(A, b, t, tol=FEAS_TOL) -> bool:
    scale = 1.0 + np.abs(b)
    return bool(np.all(A @ t - b >= -tol * scale))


def _project_active_set(p, x0, A, b):
    """
    Primal active-set projection starting from the feasible point x0.
    Returns (point, active indices, iterations) or None if it fails to settle.
    """
    x = np.array(x0, dtype=float)
    working: list[int] = []
    for it in range(1, MAX_ACTIVE_SET_ITERS + 1):
        # Equality-constrained step towards p
        if not working:
            d = p - x
        elif len(working) == 1:
            a = A[working[0]]
            r = p - x
            d = r - (r @ a) / (a @ a) * a
        else:
            d = np.zeros(2)

        if np.linalg.norm(d) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            # Multipliers from x - p = sum lambda_i a_i (up to the positive delta)
            if not working:
                return x, working, it
            G = A[working]
            lam, *_ = np.linalg.lstsq(G.T, x - p, rcond=None)
            if np.all(lam >= -1e-12):
                return x, working, it
            working.pop(int(np.argmin(lam)))
            continue

        alpha, blocking = 1.0, None
        Ad = A @ d
        for i in range(A.shape[0]):
            if i in working or Ad[i] >= -1e-18:
                continue
            step = (b[i] - A[i] @ x) / Ad[i]
            if step < alpha:
                alpha, blocking = max(step, 0.0), i
        x = x + alpha * d
        if blocking is not None:
            # a constraint parallel to the working one replaces it
            if working and abs(_cross2(A[working[0]], A[blocking])) <= 1e-14:
                working = [blocking]
            else:
                working.append(blocking)
    return None


def _project_enumerate(p, A, b):
    """Closest feasible candidate among p, edge projections and vertices."""
    candidates = [p]
    for i in range(A.shape[0]):
        a = A[i]
        candidates.append(p + (b[i] - a @ p) / (a @ a) * a)
    for i, j in itertools.combinations(range(A.shape[0]), 2):
        G = A[[i, j]]
        if abs(np.linalg.det(G)) <= 1e-14:
            continue
        candidates.append(np.linalg.solve(G, b[[i, j]]))
    best = None
    for cand in candidates:
        if not _feasible(A, b, cand, tol=1e-10):
            continue
        if best is None or np.linalg.norm(cand - p) < np.linalg.norm(best - p):
            best = cand
    return best


def solve_position_qp(delta: float, linear, region: MovingRegion, halfplanes, anchor=None) -> QpResult:
    """
    Minimiser of (delta/2)||t||^2 + c . t over the box intersected with the
    halfplanes. `anchor` is a known feasible point; when the feasible set is
    empty the anchor comes back with `feasible=False`.
    """
    if not delta > 0:
        raise ValueError("delta must be positive.")
    p = -np.asarray(linear, dtype=float) / delta
    A, b = _stack(box_halfplanes(region) + list(halfplanes))

    if _feasible(A, b, p):
        return QpResult(point=p, iterations=0)

    if anchor is not None and _feasible(A, b, np.asarray(anchor, dtype=float)):
        settled = _project_active_set(p, anchor, A, b)
        if settled is not None:
            point, active, iters = settled
            point = np.clip(point, -region.half_width, region.half_width)
            return QpResult(point=point, active=list(active), iterations=iters)
        logger.debug("active set did not settle; enumerating vertices")

    point = _project_enumerate(p, A, b)
    if point is None:
        logger.warning("position QP is infeasible; keeping the anchor")
        fallback = np.zeros(2) if anchor is None else np.asarray(anchor, dtype=float)
        return QpResult(point=fallback, feasible=False)
    return QpResult(point=np.clip(point, -region.half_width, region.half_width))
