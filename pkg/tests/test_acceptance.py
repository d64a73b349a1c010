"""Desk-scale Monte Carlo checks on solved instances; run with --runslow."""
import numpy as np
import pytest

from nfsecure.experiments.config import load_config
from nfsecure.experiments.heatmap import GridSpec, beam_heatmap, main_lobe_cells, peak_cell
from nfsecure.experiments.schemes import run_scheme, trial_rng
from nfsecure.experiments.sweeps import sweep

pytestmark = pytest.mark.slow

TRIALS = 3


def _desk(**overrides):
    return load_config(preset="desk", overrides={"trials": TRIALS, **overrides})


def _means(config):
    records = sweep(config, workers=1, progress=False)
    return {(r.scheme, r.axis_value): r for r in records}


def test_desk_trace_is_monotone_and_converges():
    config = _desk()
    converged = 0
    for trial in range(TRIALS):
        _, result = run_scheme(config, "proposed", trial_rng(config.seed, trial), trial=trial)
        trace = np.array(result.trace)
        assert np.all(np.diff(trace) >= -1e-6)
        assert result.layout.is_feasible()
        assert result.iterations <= config.max_iters
        converged += result.converged
    assert converged >= TRIALS - 1


def test_colinear_eavesdropper_ordering():
    records = _means(_desk(schemes="proposed,fd,rpa,fpah,ff"))
    mean = {scheme: records[(scheme, None)].mean for scheme in ("proposed", "fd", "rpa", "fpah", "ff")}

    assert mean["proposed"] >= 1.0
    assert mean["ff"] <= 0.2
    assert mean["fd"] >= mean["proposed"] - 1e-3
    assert mean["proposed"] >= mean["rpa"] - 1e-2
    assert mean["proposed"] >= 1.25 * mean["fpah"]


def test_secrecy_vanishes_when_eavesdropper_reaches_the_user():
    records = _means(_desk(schemes="proposed", sweep_axis="eav_distance", sweep_values="10,15"))
    assert records[("proposed", 15.0)].maximum < 0.1
    assert records[("proposed", 10.0)].mean > records[("proposed", 15.0)].mean


def test_secrecy_grows_with_power_budget():
    records = _means(_desk(schemes="fd", sweep_axis="power", sweep_values="10,20,30"))
    means = [records[("fd", value)].mean for value in (10.0, 20.0, 30.0)]
    assert means[1] >= means[0] - 1e-3
    assert means[2] >= means[1] - 1e-3


def test_secrecy_grows_with_region_size():
    records = _means(_desk(schemes="proposed", sweep_axis="region_size", sweep_values="10,40"))
    assert records[("proposed", 40.0)].mean >= records[("proposed", 10.0)].mean - 1e-3


def test_heatmap_focuses_on_user_and_widens_with_smaller_region():
    grid = GridSpec(8.6, 12.6, 8.6, 12.6, 41)
    user_xy = 15.0 * np.cos(np.pi / 4), 15.0 * np.sin(np.pi / 4)
    lobes = {}
    for size in (100.0, 10.0):
        config = _desk(eve_theta=-np.pi / 4, region_wavelengths=size)
        _, result = run_scheme(config, "proposed", trial_rng(config.seed, 0))
        heat = beam_heatmap(result.layout, result.beamformers.effective, config.wavelength, grid)
        lobes[size] = main_lobe_cells(heat)
        if size == 100.0:
            row, col = peak_cell(heat)
            assert np.hypot(grid.xs[col] - user_xy[0], grid.ys[row] - user_xy[1]) <= 0.5
    assert lobes[10.0] > lobes[100.0]
