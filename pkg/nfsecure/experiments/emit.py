from __future__ import annotations

import csv
import io
import json

from nfsecure.errors import ConfigError
from .schemes import ExperimentRecord, TrialRecord

EXPORT_HEADERS = [
    "scheme",
    "axis_value",
    "trial",
    "secrecy_bps_hz",
    "iterations",
    "seconds",
]

TRACE_HEADERS = ["scheme", "axis_value", "trial", "iteration", "secrecy_bps_hz"]

LAYOUT_HEADERS = ["scheme", "axis_value", "trial", "antenna", "y", "z"]

FORMATS = ("csv", "json")


# ----------------------------
# Helpers
# ----------------------------

def _num(value: float) -> str:
    return f"{value:.12g}"


def _axis_text(value) -> str:
    return "" if value is None else _num(value)


def _rows(records):
    for record in records:
        for t in record.trials:
            yield t


def _trial_dict(t: TrialRecord) -> dict:
    return {
        "scheme": t.scheme,
        "axis_value": None if t.axis_value is None else float(_num(t.axis_value)),
        "trial": t.trial,
        "secrecy_bps_hz": float(_num(t.secrecy_bps_hz)),
        "iterations": t.iterations,
        "seconds": float(_num(t.seconds)),
    }


def render(records, fmt: str = "csv") -> str:
    """Serialise records; the text depends only on the records."""
    if fmt == "csv":
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(EXPORT_HEADERS)
        for t in _rows(records):
            writer.writerow([
                t.scheme,
                _axis_text(t.axis_value),
                t.trial,
                _num(t.secrecy_bps_hz),
                t.iterations,
                _num(t.seconds),
            ])
        return output.getvalue()
    if fmt == "json":
        payload = {"records": [_trial_dict(t) for t in _rows(records)]}
        return json.dumps(payload, indent=2) + "\n"
    raise ConfigError(f"Unknown output format {fmt!r}; choose csv or json.")


def _write(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"Cannot write results to {path}: {exc}") from exc


def emit(records, fmt: str, path) -> str:
    """Write records to `path` as UTF-8 with LF line endings."""
    text = render(records, fmt)
    _write(path, text)
    return text


def render_traces(records) -> str:
    """One row per outer iteration of every trial; iteration 0 is the starting point."""
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(TRACE_HEADERS)
    for t in _rows(records):
        for iteration, value in enumerate(t.trace):
            writer.writerow([t.scheme, _axis_text(t.axis_value), t.trial, iteration, _num(value)])
    return output.getvalue()


def parse_traces(text: str) -> dict:
    """Inverse of `render_traces`: (scheme, axis_value, trial) -> trace tuple."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames and list(reader.fieldnames) != TRACE_HEADERS:
        raise ConfigError(f"Unexpected trace header {reader.fieldnames!r}.")
    traces = {}
    for row in reader:
        key = (
            row["scheme"],
            float(row["axis_value"]) if row["axis_value"] else None,
            int(row["trial"]),
        )
        values = traces.setdefault(key, [])
        if int(row["iteration"]) != len(values):
            raise ConfigError(f"Trace rows for {key!r} are out of order.")
        values.append(float(row["secrecy_bps_hz"]))
    return {key: tuple(values) for key, values in traces.items()}


def render_layouts(records) -> str:
    """Final antenna positions (y, z) of every trial."""
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(LAYOUT_HEADERS)
    for t in _rows(records):
        for antenna, (y, z) in enumerate(t.positions):
            writer.writerow([t.scheme, _axis_text(t.axis_value), t.trial, antenna, _num(y), _num(z)])
    return output.getvalue()


def emit_traces(records, path) -> str:
    text = render_traces(records)
    _write(path, text)
    return text


def emit_layouts(records, path) -> str:
    text = render_layouts(records)
    _write(path, text)
    return text


def group_trials(trials) -> list:
    records = []
    index = {}
    for t in trials:
        key = (t.axis_value, t.scheme)
        if key not in index:
            index[key] = ExperimentRecord(scheme=t.scheme, axis_value=t.axis_value)
            records.append(index[key])
        index[key].trials.append(t)
    return records


def parse_records(text: str, fmt: str = "csv") -> list:
    """Inverse of `render`: rebuilds ExperimentRecords in file order."""
    trials = []
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames and list(reader.fieldnames) != EXPORT_HEADERS:
            raise ConfigError(f"Unexpected CSV header {reader.fieldnames!r}.")
        for row in reader:
            trials.append(TrialRecord(
                scheme=row["scheme"],
                axis_value=float(row["axis_value"]) if row["axis_value"] else None,
                trial=int(row["trial"]),
                secrecy_bps_hz=float(row["secrecy_bps_hz"]),
                iterations=int(row["iterations"]),
                seconds=float(row["seconds"]),
            ))
    elif fmt == "json":
        for row in json.loads(text).get("records", []):
            trials.append(TrialRecord(
                scheme=row["scheme"],
                axis_value=None if row["axis_value"] is None else float(row["axis_value"]),
                trial=int(row["trial"]),
                secrecy_bps_hz=float(row["secrecy_bps_hz"]),
                iterations=int(row["iterations"]),
                seconds=float(row["seconds"]),
            ))
    else:
        raise ConfigError(f"Unknown output format {fmt!r}; choose csv or json.")
    return group_trials(trials)
