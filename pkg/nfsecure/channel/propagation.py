"""
Line-of-sight propagation between the movable-antenna array and the receive
arrays. Channel entries follow the convention

    H[l, m] = g_{l,m} * exp(-j * 2*pi/lambda * ||t_m - r_l||)

with the free-space gain g_{l,m} = lambda / (4*pi*||t_m - r_l||). Rates only
depend on H V V^H H^H, so the global conjugation relative to the response
vector exp(+j ...) is immaterial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from nfsecure.errors import ConfigError, NumericalError
from .geometry import AntennaLayout, ReceiverGeometry, receiver_positions

ChannelModel = Literal["near", "far"]

# Below this separation (m) a gain is treated as singular
_COINCIDENT = 1e-12


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray
    wavelength: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.entries)):
            raise NumericalError("Channel matrix has non-finite entries.")

    @property
    def shape(self):
        return self.entries.shape

    def scaled(self, noise_variance: float) -> np.ndarray:
        """H / sigma, the noise-normalised channel used by the solvers."""
        return self.entries / np.sqrt(noise_variance)


def wavenumber(wavelength: float) -> float:
    return 2.0 * np.pi / wavelength


def path_gain(t_m, r_l, wavelength: float):
    """Free-space amplitude lambda / (4 pi d). Vectorises over trailing axes."""
    dist = np.linalg.norm(np.asarray(t_m, dtype=float) - np.asarray(r_l, dtype=float), axis=-1)
    if np.any(dist <= _COINCIDENT):
        raise NumericalError("Antenna and receiver coincide; free-space gain is singular.")
    return wavelength / (4.0 * np.pi * dist)


def nfrv(t_m, receivers, wavelength: float) -> np.ndarray:
    """Near-field response vector exp(j k ||t_m - r_l||), one entry per receiver."""
    receivers = np.atleast_2d(np.asarray(receivers, dtype=float))
    dist = np.linalg.norm(receivers - np.asarray(t_m, dtype=float), axis=1)
    if np.any(dist <= _COINCIDENT):
        raise NumericalError("Antenna and receiver coincide.")
    return np.exp(1j * wavenumber(wavelength) * dist)


def _lift(yz) -> np.ndarray:
    yz = np.atleast_2d(np.asarray(yz, dtype=float))
    return np.column_stack([np.zeros(yz.shape[0]), yz])


def channel_columns(yz, receiver_points, wavelength: float, model: ChannelModel = "near") -> np.ndarray:
    """
    Channel columns for in-plane antenna positions `yz` (shape (M, 2)).
    Returns an (L, M) complex array.
    """
    points = _lift(yz)
    receiver_points = np.atleast_2d(receiver_points)
    k = wavenumber(wavelength)
    if model == "near":
        dist = np.linalg.norm(receiver_points[:, None, :] - points[None, :, :], axis=-1)
        if np.any(dist <= _COINCIDENT):
            raise NumericalError("Antenna and receiver coincide.")
        gain = wavelength / (4.0 * np.pi * dist)
        return gain * np.exp(-1j * k * dist)
    if model == "far":
        rng = np.linalg.norm(receiver_points, axis=1)
        if np.any(rng <= _COINCIDENT):
            raise NumericalError("Receiver at the array origin.")
        direction = receiver_points / rng[:, None]
        gain = wavelength / (4.0 * np.pi * rng)
        phase = rng[:, None] - direction @ points.T
        return gain[:, None] * np.exp(-1j * k * phase)
    raise ConfigError(f"Unknown channel model {model!r}.")


def channel_column(yz, receiver_points, wavelength: float, model: ChannelModel = "near") -> np.ndarray:
    return channel_columns(np.asarray(yz, dtype=float).reshape(1, 2), receiver_points, wavelength, model)[:, 0]


def near_field_channel(layout: AntennaLayout, geom: ReceiverGeometry, wavelength: float) -> ChannelMatrix:
    return ChannelMatrix(channel_columns(layout.positions, receiver_positions(geom), wavelength, "near"), wavelength)


def far_field_channel(layout: AntennaLayout, geom: ReceiverGeometry, wavelength: float) -> ChannelMatrix:
    """Plane-wave model: common amplitude per row, phase linear in t_m."""
    return ChannelMatrix(channel_columns(layout.positions, receiver_positions(geom), wavelength, "far"), wavelength)


def fresnel_distance(yz, element_polar) -> np.ndarray:
    """
    Second-order (Fresnel) expansion of ||t_m - r_l|| for an antenna at
    (0, y, z) and receive elements given as (r, theta, phi) rows:

      gamma = r - y a - z b + (y^2 + z^2 - (y a + z b)^2) / (2 r)

    with a = sin(theta) sin(phi), b = cos(phi).
    """
    y, z = np.asarray(yz, dtype=float).reshape(2)
    polar = np.atleast_2d(np.asarray(element_polar, dtype=float))
    r, theta, phi = polar[:, 0], polar[:, 1], polar[:, 2]
    if np.any(r <= 0):
        raise ConfigError("Fresnel expansion needs r > 0.")
    a = np.sin(theta) * np.sin(phi)
    b = np.cos(phi)
    u = y * a + z * b
    gamma = r - u + (y * y + z * z - u * u) / (2.0 * r)
    return gamma if np.ndim(element_polar) > 1 else gamma[0]


def rayleigh_distance(aperture_diagonal: float, wavelength: float) -> float:
    """d_R = 2 D^2 / lambda."""
    if aperture_diagonal <= 0 or wavelength <= 0:
        raise ConfigError("Aperture and wavelength must be positive.")
    return 2.0 * aperture_diagonal ** 2 / wavelength
