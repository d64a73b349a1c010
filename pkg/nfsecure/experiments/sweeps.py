from __future__ import annotations

import logging
from dataclasses import replace
from multiprocessing import Pool

from tqdm import tqdm

from nfsecure.errors import ConfigError
from .config import ExperimentConfig
from .schemes import ExperimentRecord, TrialRecord, run_scheme, trial_rng

logger = logging.getLogger(__name__)


def _tasks(config: ExperimentConfig):
    values = list(config.sweep_values) if config.sweep_axis else [None]
    for value in values:
        point = config.with_axis(config.sweep_axis, value)
        for scheme in config.schemes:
            for trial in range(config.trials):
                yield point, scheme, trial, value


def _run_task(args) -> TrialRecord:
    point, scheme, trial, value = args
    record, _ = run_scheme(point, scheme, trial_rng(point.seed, trial), trial=trial, axis_value=value)
    return record


def sweep(config: ExperimentConfig, workers: int = 1, deterministic: bool = False, progress: bool = True) -> list:
    """
    Every (swept value, scheme, trial) combination. Trial t of every scheme
    uses the stream seeded by (seed, t), so schemes are compared on paired
    initial layouts. Records come back ordered by value, scheme, then trial.
    """
    if config.sweep_axis and not config.sweep_values:
        raise ConfigError("A sweep needs at least one value.")
    tasks = list(_tasks(config))
    bar = dict(total=len(tasks), desc=config.sweep_axis or "trials", ncols=80, disable=not progress)

    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            trials = list(tqdm(pool.imap(_run_task, tasks), **bar))
    else:
        trials = [_run_task(task) for task in tqdm(tasks, **bar)]

    if deterministic:
        trials = [replace(t, seconds=0.0) for t in trials]

    values = list(config.sweep_values) if config.sweep_axis else [None]
    records = []
    for value in values:
        for scheme in config.schemes:
            group = [
                t for t in trials
                if t.scheme == scheme and t.axis_value == (None if value is None else float(value))
            ]
            group.sort(key=lambda t: t.trial)
            records.append(ExperimentRecord(scheme=scheme, axis_value=value if value is None else float(value), trials=group))
            logger.debug("%s @ %s: mean secrecy %.6g bits/s/Hz", scheme, value, records[-1].mean)
    return records
