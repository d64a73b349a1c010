from flask import Response, jsonify

from . import bp
from nfsecure.experiments.emit import render
from nfsecure.extensions import db
from nfsecure.models import ExperimentRun, records_for_run


# ----------------------------
# Helpers
# ----------------------------

def _export(run_id: int, fmt: str, mimetype: str):
    run = db.get_or_404(ExperimentRun, run_id)
    return Response(
        render(records_for_run(run), fmt),
        mimetype=mimetype,
        headers={
            "Content-Disposition": f"attachment; filename=run_{run.id}.{fmt}"
        },
    )


@bp.route("")
def list_runs():
    runs = ExperimentRun.query.order_by(ExperimentRun.id.desc()).all()
    return jsonify([run.to_dict() for run in runs])


@bp.route("/<int:run_id>")
def run_detail(run_id):
    """Stored run with per scheme / swept value statistics."""
    run = db.get_or_404(ExperimentRun, run_id)
    payload = run.to_dict()
    payload["config"] = run.config
    payload["summaries"] = [record.summary() for record in records_for_run(run)]
    return jsonify(payload)


@bp.route("/<int:run_id>/export.csv")
def export_csv(run_id):
    return _export(run_id, "csv", "text/csv")


@bp.route("/<int:run_id>/export.json")
def export_json(run_id):
    return _export(run_id, "json", "application/json")
