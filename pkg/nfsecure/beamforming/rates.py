from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from nfsecure.channel import ChannelMatrix
from nfsecure.errors import NumericalError

# Unit-modulus and power-budget slack for BeamformerSet.validate
MODULUS_TOL = 1e-9
POWER_TOL = 1e-9


def _as_array(channel) -> np.ndarray:
    if isinstance(channel, ChannelMatrix):
        return channel.entries
    return np.asarray(channel)


def log_det_gram(G: np.ndarray) -> float:
    """
    ln det(I + G G^H) through a Cholesky factor of the smaller Gram side
    (L x L or K x K; the determinants agree).
    """
    rows, cols = G.shape
    gram = G @ G.conj().T if rows <= cols else G.conj().T @ G
    gram = np.eye(gram.shape[0]) + gram
    try:
        chol = scipy.linalg.cholesky(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Gram matrix is not positive definite.") from exc
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))))


def achievable_rate(channel, V, noise_variance: float) -> float:
    """log2 det(I + sigma^-2 H V V^H H^H) in bits/s/Hz."""
    H = _as_array(channel)
    V = np.asarray(V)
    if noise_variance <= 0:
        raise NumericalError("Noise variance must be positive.")
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(V))):
        raise NumericalError("Channel or beamformer has non-finite entries.")
    if H.shape[1] != V.shape[0]:
        raise ValueError(f"Channel {H.shape} and beamformer {V.shape} do not conform.")
    G = (H @ V) / np.sqrt(noise_variance)
    return max(log_det_gram(G) / np.log(2.0), 0.0)


@dataclass(frozen=True)
class RatePair:
    user: float
    eavesdropper: float

    @property
    def secrecy(self) -> float:
        return max(self.user - self.eavesdropper, 0.0)


def secrecy_rate(H, Z, V, noise_user: float, noise_eve: float) -> RatePair:
    """R = [R_U - R_E]^+ for a common effective beamformer V."""
    return RatePair(
        user=achievable_rate(H, V, noise_user),
        eavesdropper=achievable_rate(Z, V, noise_eve),
    )


@dataclass
class BeamformerSet:
    """
    Fully-digital W (M x K, optional), analog W_A (M x N, unit modulus) and
    digital W_D (N x K). Fully-digital schemes leave W_A / W_D empty.
    """
    power_budget: float
    analog: Optional[np.ndarray] = None
    digital: Optional[np.ndarray] = None
    full: Optional[np.ndarray] = None

    @property
    def is_hybrid(self) -> bool:
        return self.analog is not None and self.digital is not None

    @property
    def effective(self) -> np.ndarray:
        """V = W_A W_D for hybrid sets, W otherwise."""
        if self.is_hybrid:
            return self.analog @ self.digital
        if self.full is None:
            raise ValueError("BeamformerSet carries neither a hybrid pair nor a fully-digital beamformer.")
        return self.full

    def validate(self) -> "BeamformerSet":
        budget = self.power_budget * (1.0 + POWER_TOL)
        if self.is_hybrid:
            modulus_gap = np.max(np.abs(np.abs(self.analog) - 1.0))
            if modulus_gap > MODULUS_TOL:
                raise NumericalError(f"Analog beamformer leaves the unit circle by {modulus_gap:.3g}.")
            power = np.linalg.norm(self.analog @ self.digital) ** 2
            if power > budget:
                raise NumericalError(f"Hybrid beamformer power {power:.6g} W exceeds budget {self.power_budget:.6g} W.")
        if self.full is not None:
            power = np.linalg.norm(self.full) ** 2
            if power > budget:
                raise NumericalError(f"Fully-digital power {power:.6g} W exceeds budget {self.power_budget:.6g} W.")
        return self
