from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from nfsecure.errors import ConfigError

# Pairwise spacing slack shared by every feasibility check
SPACING_TOL = 1e-12

Role = Literal["user", "eavesdropper"]


@dataclass(frozen=True)
class MovingRegion:
    """
    Square antenna moving region in the y-O-z plane (x = 0):
      [-A/2, A/2] x [-A/2, A/2]
    """
    half_width: float

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ConfigError(f"Moving region half-width must be positive, got {self.half_width!r}.")

    @property
    def side(self) -> float:
        return 2.0 * self.half_width

    @property
    def half_diagonal(self) -> float:
        return float(np.sqrt(2.0) * self.half_width)

    def contains(self, yz, atol: float = SPACING_TOL) -> bool:
        yz = np.atleast_2d(np.asarray(yz, dtype=float))
        return bool(np.all(np.abs(yz) <= self.half_width + atol))


@dataclass(frozen=True)
class AntennaLayout:
    """
    Positions of the M movable antennas. `positions` holds the in-plane
    (y, z) coordinates; `points` lifts them to 3-D with x = 0.
    """
    positions: np.ndarray
    min_spacing: float
    region: MovingRegion

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True).reshape(-1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def num_antennas(self) -> int:
        return self.positions.shape[0]

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([np.zeros(self.num_antennas), self.positions])

    def pairwise_distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)

    def min_pairwise_distance(self) -> float:
        if self.num_antennas < 2:
            return float("inf")
        dist = self.pairwise_distances()
        return float(dist[np.triu_indices(self.num_antennas, k=1)].min())

    def is_feasible(self) -> bool:
        return (
            self.region.contains(self.positions)
            and self.min_pairwise_distance() >= self.min_spacing - SPACING_TOL
        )

    def validate(self) -> "AntennaLayout":
        if not self.region.contains(self.positions):
            raise ConfigError("Antenna position outside the moving region.")
        gap = self.min_pairwise_distance()
        if gap < self.min_spacing - SPACING_TOL:
            raise ConfigError(
                f"Antennas closer than d_min: {gap:.6g} m < {self.min_spacing:.6g} m."
            )
        return self

    def with_position(self, m: int, yz) -> "AntennaLayout":
        pos = np.array(self.positions, copy=True)
        pos[m] = np.asarray(yz, dtype=float)
        return AntennaLayout(pos, self.min_spacing, self.region)


def polar_to_cartesian(r, theta, phi) -> np.ndarray:
    """r_l = [r cos(theta) sin(phi), r sin(theta) sin(phi), r cos(phi)]."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack(
        [r * np.cos(theta) * np.sin(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(phi)],
        axis=-1,
    )


def cartesian_to_polar(points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    theta = np.arctan2(points[:, 1], points[:, 0])
    phi = np.arccos(np.clip(points[:, 2] / r, -1.0, 1.0))
    return np.column_stack([r, theta, phi])


def _array_shape(num_elements: int) -> tuple[int, int]:
    # Most square rows x cols factorisation, rows <= cols
    rows = int(np.floor(np.sqrt(num_elements)))
    while num_elements % rows:
        rows -= 1
    return rows, num_elements // rows


@dataclass(frozen=True)
class ReceiverGeometry:
    role: Role
    element_polar: np.ndarray
    noise_variance: float
    center_polar: tuple = field(default=None, compare=False)

    def __post_init__(self):
        if self.role not in ("user", "eavesdropper"):
            raise ConfigError(f"Unknown receiver role {self.role!r}.")
        polar = np.array(self.element_polar, dtype=float, copy=True).reshape(-1, 3)
        if polar.shape[0] < 2:
            raise ConfigError(f"{self.role} needs at least 2 receive elements, got {polar.shape[0]}.")
        if np.any(polar[:, 0] <= 0) or not np.all(np.isfinite(polar)):
            raise ConfigError(f"{self.role} element distances must be positive and finite.")
        if not self.noise_variance > 0:
            raise ConfigError(f"{self.role} noise variance must be positive.")
        polar.setflags(write=False)
        object.__setattr__(self, "element_polar", polar)

    @property
    def num_elements(self) -> int:
        return self.element_polar.shape[0]

    @classmethod
    def planar_array(
        cls,
        role: Role,
        r: float,
        theta: float,
        phi: float = np.pi / 2,
        num_elements: int = 4,
        wavelength: float = 0.01,
        noise_variance: float = 1e-11,
    ) -> "ReceiverGeometry":
        """
        Half-wavelength planar array centred at the polar point (r, theta, phi)
        and facing the origin. L = 4 gives a 2x2 array, L = 2 a 1x2 array.
        """
        if r <= 0:
            raise ConfigError(f"{role} distance must be positive, got {r!r}.")
        center = polar_to_cartesian(r, theta, phi)
        normal = center / np.linalg.norm(center)
        up = np.array([0.0, 0.0, 1.0])
        horizontal = np.cross(up, normal)
        if np.linalg.norm(horizontal) < 1e-9:
            horizontal = np.array([1.0, 0.0, 0.0])
        horizontal /= np.linalg.norm(horizontal)
        vertical = np.cross(normal, horizontal)

        rows, cols = _array_shape(num_elements)
        spacing = wavelength / 2
        row_off = (np.arange(rows) - (rows - 1) / 2) * spacing
        col_off = (np.arange(cols) - (cols - 1) / 2) * spacing
        points = np.array([
            center + c * horizontal + v * vertical
            for v in row_off
            for c in col_off
        ])
        return cls(role, cartesian_to_polar(points), noise_variance, center_polar=(r, theta, phi))


def receiver_positions(geom: ReceiverGeometry) -> np.ndarray:
    """Cartesian position of every receive element, shape (L, 3)."""
    polar = geom.element_polar
    if np.any(polar[:, 0] <= 0):
        raise ConfigError("Receiver element distance must be positive.")
    return polar_to_cartesian(polar[:, 0], polar[:, 1], polar[:, 2])


def lattice_layout(num_antennas: int, spacing: float, region: MovingRegion, min_spacing: float) -> AntennaLayout:
    """
    Centred uniform lattice with ceil(sqrt(M)) points per side, filled in
    row-major order. Raises ConfigError if it does not fit or violates d_min.
    """
    if num_antennas < 1:
        raise ConfigError("At least one antenna is required.")
    side = int(np.ceil(np.sqrt(num_antennas)))
    if side > 1 and spacing < min_spacing - SPACING_TOL:
        raise ConfigError(
            f"Lattice spacing {spacing:.6g} m is below d_min {min_spacing:.6g} m "
            f"for M={num_antennas} in a {region.side:.6g} m region."
        )
    offsets = (np.arange(side) - (side - 1) / 2) * spacing
    zz, yy = np.meshgrid(offsets[::-1], offsets, indexing="ij")
    grid = np.column_stack([yy.ravel(), zz.ravel()])[:num_antennas]
    if not region.contains(grid):
        raise ConfigError(f"A {side}x{side} lattice with spacing {spacing:.6g} m does not fit the region.")
    return AntennaLayout(grid, min_spacing, region)
