from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from nfsecure.errors import ConfigError

SCHEMES = ("proposed", "fd", "rpa", "fpaf", "fpah", "ff")
SWEEP_AXES = ("eav_distance", "eav_azimuth", "region_size", "power", "num_antennas")

# sweep axis -> ExperimentConfig field it overrides
AXIS_FIELDS = {
    "eav_distance": "eve_r",
    "eav_azimuth": "eve_theta",
    "region_size": "region_wavelengths",
    "power": "power_dbm",
    "num_antennas": "num_antennas",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Scene and Monte Carlo settings. Units: meters, radians, dBm; the moving
    region side is given in wavelengths. Defaults are the full-size setup.
    """
    num_antennas: int = 64
    num_rf: int = 4
    num_streams: int = 2
    user_elements: int = 4
    eve_elements: int = 4
    region_wavelengths: float = 100.0
    wavelength: float = 0.01
    min_spacing: Optional[float] = None  # None -> wavelength / 2
    power_dbm: float = 20.0
    noise_dbm: float = -80.0
    user_r: float = 15.0
    user_theta: float = float(np.pi / 4)
    user_phi: float = float(np.pi / 2)
    eve_r: float = 10.0
    eve_theta: float = float(np.pi / 4)
    eve_phi: float = float(np.pi / 2)
    eavesdropper: bool = True
    schemes: tuple = ("proposed",)
    sweep_axis: Optional[str] = None
    sweep_values: tuple = field(default_factory=tuple)
    trials: int = 500
    seed: int = 0
    eps3: float = 1e-6
    max_iters: int = 300
    mo_max_iters: int = 300
    mm_max_iters: int = 30

    @property
    def spacing(self) -> float:
        return self.wavelength / 2 if self.min_spacing is None else self.min_spacing

    @property
    def region_side(self) -> float:
        return self.region_wavelengths * self.wavelength

    def with_axis(self, axis: Optional[str], value) -> "ExperimentConfig":
        """Copy with the swept parameter set to `value`."""
        if axis is None:
            return self
        if axis not in AXIS_FIELDS:
            raise ConfigError(f"Unknown sweep axis {axis!r}.")
        name = AXIS_FIELDS[axis]
        return replace(self, **{name: int(value) if name == "num_antennas" else float(value)})

    def to_dict(self) -> dict:
        data = asdict(self)
        data["schemes"] = list(self.schemes)
        data["sweep_values"] = list(self.sweep_values)
        return data


PRESETS = {
    "paper": {},
    "full": {},
    "desk": {
        "num_antennas": 16,
        "region_wavelengths": 20.0,
        "trials": 50,
        "user_elements": 2,
        "eve_elements": 2,
    },
}

_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _normalise(values: dict) -> dict:
    out = dict(values)
    if "schemes" in out:
        schemes = out["schemes"]
        if isinstance(schemes, str):
            schemes = [s.strip() for s in schemes.split(",") if s.strip()]
        out["schemes"] = tuple(schemes)
    if "sweep_values" in out:
        vals = out["sweep_values"]
        if isinstance(vals, str):
            try:
                vals = [float(v) for v in vals.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"Sweep values must be numbers: {out['sweep_values']!r}.") from exc
        out["sweep_values"] = tuple(float(v) for v in vals)
    return out


def _apply(config: ExperimentConfig, values: dict, source: str) -> ExperimentConfig:
    unknown = sorted(set(values) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"Unknown keys in {source}: {', '.join(unknown)}.")
    return replace(config, **_normalise(values))


def read_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object.")
    return data


def load_config(path=None, preset: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """
    Built-in defaults, then the preset, then the JSON file, then explicit
    overrides (None values are skipped). The result is validated.
    """
    from .forms import validate_config

    config = ExperimentConfig()
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"Unknown preset {preset!r}; choose from {', '.join(PRESETS)}.")
        config = _apply(config, PRESETS[preset], f"preset {preset}")
    if path is not None:
        config = _apply(config, read_config_file(path), str(path))
    if overrides:
        config = _apply(config, {k: v for k, v in overrides.items() if v is not None}, "command-line flags")
    return validate_config(config)
