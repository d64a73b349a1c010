import click
from flask import current_app

from . import bp
from .config import PRESETS, SWEEP_AXES, load_config
from .emit import FORMATS, emit, emit_layouts, emit_traces, render
from .heatmap import GridSpec, beam_heatmap, main_lobe_cells, peak_cell, write_heatmap_csv
from .schemes import run_scheme, trial_rng
from .sweeps import sweep
from nfsecure.errors import ConfigError, NumericalError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# ----------------------------
# Helpers
# ----------------------------

def _fail(message: str, code: int):
    click.echo(f"Error: {message}", err=True)
    raise SystemExit(code)


def _format_for(out_path, fmt):
    if fmt:
        return fmt
    if out_path and str(out_path).lower().endswith(".json"):
        return "json"
    return "csv"


@bp.cli.command("run")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON scene/experiment file.")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Built-in parameter set.")
@click.option("--scheme", "schemes", help="Scheme tag or comma-separated list.")
@click.option("--sweep", "sweep_axis", type=click.Choice(SWEEP_AXES), help="Parameter to sweep.")
@click.option("--values", "sweep_values", help="Comma-separated sweep values.")
@click.option("--trials", type=int, help="Monte Carlo trials per scheme and value.")
@click.option("--seed", type=int, help="Master seed.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Output file (stdout if omitted).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Output format (default from --out, else csv).")
@click.option("--workers", type=int, help="Worker processes (default NFSECURE_WORKERS).")
@click.option("--deterministic", is_flag=True, help="Write seconds as 0 so output depends only on config and seed.")
@click.option("--no-store", is_flag=True, help="Do not save the run in the results database.")
@click.option("--label", help="Label stored with the run.")
@click.option("--trace-out", type=click.Path(dir_okay=False), help="CSV of the secrecy trace of every trial.")
@click.option("--layout-out", type=click.Path(dir_okay=False), help="CSV of the final antenna positions of every trial.")
def run_command(config_path, preset, schemes, sweep_axis, sweep_values, trials, seed,
                out_path, fmt, workers, deterministic, no_store, label, trace_out, layout_out):
    """Run a Monte Carlo experiment and emit per-trial secrecy rates."""
    try:
        config = load_config(
            config_path,
            preset=preset,
            overrides={
                "schemes": schemes,
                "sweep_axis": sweep_axis,
                "sweep_values": sweep_values,
                "trials": trials,
                "seed": seed,
            },
        )
        workers = workers or current_app.config.get("NFSECURE_WORKERS", 1)
        current_app.logger.info(
            "Running %s over %s with %d trials (seed %d, %d workers)",
            ",".join(config.schemes), config.sweep_axis or "a single point",
            config.trials, config.seed, workers,
        )
        records = sweep(config, workers=workers, deterministic=deterministic)
        fmt = _format_for(out_path, fmt)
        if out_path:
            emit(records, fmt, out_path)
            current_app.logger.info("Wrote %s", out_path)
        else:
            click.echo(render(records, fmt), nl=False)
        if trace_out:
            emit_traces(records, trace_out)
        if layout_out:
            emit_layouts(records, layout_out)
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)
    except NumericalError as exc:
        _fail(str(exc), EXIT_NUMERICAL)
    except OSError as exc:
        _fail(str(exc), EXIT_CONFIG)

    for record in records:
        current_app.logger.info(
            "%-8s %-10s mean %.4f bits/s/Hz (std %.4f, %d trials)",
            record.scheme, "" if record.axis_value is None else f"{record.axis_value:g}",
            record.mean, record.std, len(record.trials),
        )

    if current_app.config.get("NFSECURE_STORE_RESULTS", True) and not no_store:
        from nfsecure.models import store_records
        run = store_records(records, config, label=label)
        current_app.logger.info("Stored as run %d", run.id)


@bp.cli.command("heatmap")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON scene/experiment file.")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Built-in parameter set.")
@click.option("--scheme", default="proposed", show_default=True, help="Scheme to solve before mapping.")
@click.option("--seed", type=int, help="Master seed; trial 0 of this seed is solved.")
@click.option("--grid", "grid_text", default="0,20,0,20,200", show_default=True, help="X0,X1,Y0,Y1,RES in meters.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Output CSV.")
@click.option("--path-loss", is_flag=True, help="Keep free-space gain in the observer response.")
def heatmap_command(config_path, preset, scheme, seed, grid_text, out_path, path_loss):
    """Solve one trial and write the normalised beam-focusing map."""
    try:
        config = load_config(config_path, preset=preset, overrides={"schemes": scheme, "seed": seed})
        grid = GridSpec.parse(grid_text)
        _, result = run_scheme(config, scheme, trial_rng(config.seed, 0))
        heat = beam_heatmap(result.layout, result.beamformers.effective, config.wavelength, grid, path_loss=path_loss)
        write_heatmap_csv(out_path, heat, grid)
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)
    except NumericalError as exc:
        _fail(str(exc), EXIT_NUMERICAL)
    except OSError as exc:
        _fail(str(exc), EXIT_CONFIG)

    row, col = peak_cell(heat)
    current_app.logger.info(
        "Peak at x=%.3f m, y=%.3f m; -3 dB main lobe covers %d cells; wrote %s",
        grid.xs[col], grid.ys[row], main_lobe_cells(heat), out_path,
    )
