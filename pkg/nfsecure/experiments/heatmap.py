from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from nfsecure.channel import AntennaLayout, channel_columns
from nfsecure.errors import ConfigError

SKIPPED = -1.0
# Observers closer than this to an antenna are skipped (m)
COINCIDENT = 1e-9
# Stand-in receiver for skipped observers, far from any antenna (m)
FAR_POINT = (1.0e4, 0.0, 0.0)


@dataclass(frozen=True)
class GridSpec:
    """Observer grid in the z = 0 plane: x in [x0, x1], y in [y0, y1], res x res cells."""
    x0: float = 0.0
    x1: float = 20.0
    y0: float = 0.0
    y1: float = 20.0
    res: int = 200

    def __post_init__(self):
        if self.res < 2 or not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ConfigError("Heatmap grid needs x1 > x0, y1 > y0 and at least 2 cells per side.")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 5:
            raise ConfigError(f"Grid must be X0,X1,Y0,Y1,RES, got {text!r}.")
        try:
            x0, x1, y0, y1 = (float(p) for p in parts[:4])
            res = int(parts[4])
        except ValueError as exc:
            raise ConfigError(f"Grid must be X0,X1,Y0,Y1,RES, got {text!r}.") from exc
        return cls(x0, x1, y0, y1, res)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.res)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.res)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the cell nearest to (x, y)."""
        return int(np.argmin(np.abs(self.ys - y))), int(np.argmin(np.abs(self.xs - x)))


def beam_heatmap(layout: AntennaLayout, V: np.ndarray, wavelength: float, grid: GridSpec, path_loss: bool = False) -> np.ndarray:
    """
    Normalised received power |h_p^T V|^2 for a single-antenna observer at every
    grid point, rows over y and columns over x, with h_p the near-field
    channel row of the observer. By default the row keeps only its phase so the
    map shows focusing rather than distance decay; `path_loss=True` keeps the
    free-space gain. Cells where the observer coincides with an antenna hold -1.
    """
    X, Y = np.meshgrid(grid.xs, grid.ys)
    observers = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    dist = np.linalg.norm(observers[:, None, :] - layout.points[None, :, :], axis=-1)
    skipped = np.any(dist <= COINCIDENT, axis=1)
    observers[skipped] = FAR_POINT

    response = channel_columns(layout.positions, observers, wavelength, "near")
    if not path_loss:
        response = response / np.abs(response)
    power = np.sum(np.abs(response @ V) ** 2, axis=1)
    power[skipped] = 0.0
    peak = power.max()
    if peak > 0:
        power = power / peak
    power[skipped] = SKIPPED
    return power.reshape(grid.res, grid.res)


def peak_cell(heat: np.ndarray) -> tuple[int, int]:
    row, col = np.unravel_index(int(np.argmax(heat)), heat.shape)
    return int(row), int(col)


def main_lobe_cells(heat: np.ndarray, drop_db: float = 3.0) -> int:
    """Number of cells within `drop_db` of the grid maximum."""
    threshold = heat.max() * 10.0 ** (-drop_db / 10.0)
    return int(np.count_nonzero(heat >= threshold))


def write_heatmap_csv(path, heat: np.ndarray, grid: GridSpec):
    """Row-major grid: header row of x values, then one row per y value."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["y\\x"] + [f"{x:.12g}" for x in grid.xs])
            for y, row in zip(grid.ys, heat):
                writer.writerow([f"{y:.12g}"] + [f"{v:.12g}" for v in row])
    except OSError as exc:
        raise OSError(f"Cannot write heatmap to {path}: {exc}") from exc
