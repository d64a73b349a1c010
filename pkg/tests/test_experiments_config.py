import json

import numpy as np
import pytest

from nfsecure.errors import ConfigError
from nfsecure.experiments.config import ExperimentConfig, load_config
from nfsecure.experiments.schemes import build_scene, scheme_layout, trial_rng
from nfsecure.channel import MovingRegion


def _write(tmp_path, data):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_defaults_are_full_size_setup():
    config = load_config()
    assert config.num_antennas == 64
    assert config.region_side == pytest.approx(1.0)
    assert config.spacing == pytest.approx(0.005)
    assert config.schemes == ("proposed",)
    assert config.trials == 500


def test_load_order_preset_file_then_overrides(tmp_path):
    path = _write(tmp_path, {"num_antennas": 9, "trials": 20, "schemes": ["proposed", "rpa"]})
    config = load_config(path, preset="desk", overrides={"trials": 3, "seed": None})
    assert config.num_antennas == 9  # file beats preset
    assert config.region_wavelengths == 20.0  # preset survives
    assert config.trials == 3  # override beats file
    assert config.seed == 0  # None overrides are skipped
    assert config.schemes == ("proposed", "rpa")


def test_comma_separated_overrides():
    config = load_config(overrides={"schemes": "fd, ff", "sweep_axis": "power", "sweep_values": "10,20,30"})
    assert config.schemes == ("fd", "ff")
    assert config.sweep_values == (10.0, 20.0, 30.0)


def test_unknown_key_is_rejected(tmp_path):
    with pytest.raises(ConfigError, match="antennas"):
        load_config(_write(tmp_path, {"antennas": 4}))


def test_bad_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, [1, 2, 3]))


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_config(preset="huge")


@pytest.mark.parametrize("overrides", [
    {"schemes": "proposed,magic"},
    {"num_rf": 1, "num_streams": 2},
    {"trials": 0},
    {"sweep_axis": "power"},
    {"sweep_values": "1,2"},
    {"sweep_axis": "height", "sweep_values": "1"},
    {"min_spacing": -0.01},
    {"sweep_values": "1,x"},
])
def test_invalid_settings_raise(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_with_axis():
    config = ExperimentConfig()
    assert config.with_axis(None, 3.0) is config
    assert config.with_axis("num_antennas", 36.0).num_antennas == 36
    assert isinstance(config.with_axis("num_antennas", 36.0).num_antennas, int)
    assert config.with_axis("eav_distance", 12).eve_r == 12.0
    assert config.with_axis("region_size", 50).region_side == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        config.with_axis("height", 1.0)


def test_half_wavelength_lattice():
    config = ExperimentConfig()
    region = MovingRegion(config.region_side / 2)
    layout = scheme_layout(config, "fpah", region, trial_rng(0, 0))
    assert layout.num_antennas == 64
    ys = np.unique(np.round(layout.positions[:, 0], 12))
    assert len(ys) == 8
    np.testing.assert_allclose(np.diff(ys), 0.005)


def test_full_region_lattice_touches_edges():
    config = load_config(preset="desk")
    region = MovingRegion(config.region_side / 2)
    layout = scheme_layout(config, "fpaf", region, trial_rng(0, 0))
    np.testing.assert_allclose(np.abs(layout.positions).max(), region.half_width)
    assert layout.is_feasible()


def test_build_scene_flags():
    config = load_config(preset="desk")
    proposed = build_scene(config, "proposed", trial_rng(0, 0))
    assert proposed.hybrid and proposed.optimize_positions and proposed.model == "near"
    assert proposed.power_budget == pytest.approx(0.1)
    assert proposed.user.noise_variance == pytest.approx(1e-11)

    assert not build_scene(config, "fd", trial_rng(0, 0)).hybrid
    assert not build_scene(config, "rpa", trial_rng(0, 0)).optimize_positions
    assert build_scene(config, "ff", trial_rng(0, 0)).model == "far"

    without_eve = build_scene(load_config(preset="desk", overrides={"eavesdropper": False}), "proposed", trial_rng(0, 0))
    assert without_eve.eavesdropper is None

    with pytest.raises(ConfigError):
        build_scene(config, "magic", trial_rng(0, 0))


def test_trial_streams_pair_schemes_and_separate_trials():
    config = load_config(preset="desk")
    a = build_scene(config, "proposed", trial_rng(5, 2)).layout
    b = build_scene(config, "rpa", trial_rng(5, 2)).layout
    c = build_scene(config, "rpa", trial_rng(5, 3)).layout
    np.testing.assert_array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


@pytest.mark.parametrize("preset", ["paper", "full"])
def test_full_size_presets_are_the_defaults(preset):
    assert load_config(preset=preset) == load_config()
