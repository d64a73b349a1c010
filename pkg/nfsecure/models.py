import json

from .extensions import db


class TimestampMixin:
    created_at = db.Column(
        db.DateTime,
        server_default=db.func.now(),
        nullable=False
    )
    updated_at = db.Column(
        db.DateTime,
        server_default=db.func.now(),
        onupdate=db.func.now(),
        nullable=False
    )


class ExperimentRun(TimestampMixin, db.Model):
    __tablename__ = "experiment_runs"

    id = db.Column(db.Integer, primary_key=True)
    label = db.Column(db.String(200), nullable=True)
    axis = db.Column(db.String(50), nullable=True)  # sweep axis, empty for a single point
    schemes = db.Column(db.String(200), nullable=False)  # comma-separated tags
    trials = db.Column(db.Integer, nullable=False)
    seed = db.Column(db.Integer, nullable=False)
    config_json = db.Column(db.Text, nullable=False)

    results = db.relationship(
        "TrialResult",
        back_populates="run",
        lazy="dynamic",
        order_by="TrialResult.id",
        cascade="all, delete-orphan",
    )

    @property
    def config(self) -> dict:
        return json.loads(self.config_json)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "axis": self.axis,
            "schemes": self.schemes.split(","),
            "trials": self.trials,
            "seed": self.seed,
            "created_at": self.created_at.isoformat() if self.created_at else None,
        }

    def __repr__(self):
        return f"<ExperimentRun {self.id} ({self.schemes})>"


class TrialResult(db.Model):
    __tablename__ = "trial_results"

    id = db.Column(db.Integer, primary_key=True)
    run_id = db.Column(db.Integer, db.ForeignKey("experiment_runs.id"), nullable=False, index=True)
    scheme = db.Column(db.String(20), nullable=False)
    axis_value = db.Column(db.Float, nullable=True)
    trial = db.Column(db.Integer, nullable=False)
    secrecy_bps_hz = db.Column(db.Float, nullable=False)
    iterations = db.Column(db.Integer, nullable=False)
    seconds = db.Column(db.Float, nullable=False)

    run = db.relationship("ExperimentRun", back_populates="results")

    def __repr__(self):
        return f"<TrialResult run={self.run_id} {self.scheme} trial={self.trial}>"


def store_records(records, config, label=None) -> ExperimentRun:
    """Persist one sweep (list of ExperimentRecord) with the config that produced it."""
    run = ExperimentRun(
        label=label,
        axis=config.sweep_axis,
        schemes=",".join(config.schemes),
        trials=config.trials,
        seed=config.seed,
        config_json=json.dumps(config.to_dict(), sort_keys=True),
    )
    db.session.add(run)
    for record in records:
        for t in record.trials:
            db.session.add(TrialResult(
                run=run,
                scheme=t.scheme,
                axis_value=t.axis_value,
                trial=t.trial,
                secrecy_bps_hz=t.secrecy_bps_hz,
                iterations=t.iterations,
                seconds=t.seconds,
            ))
    db.session.commit()
    return run


def records_for_run(run: ExperimentRun) -> list:
    """Rebuild the ExperimentRecords of a stored run, in insertion order."""
    from .experiments.emit import group_trials
    from .experiments.schemes import TrialRecord

    trials = [
        TrialRecord(
            scheme=row.scheme,
            axis_value=row.axis_value,
            trial=row.trial,
            secrecy_bps_hz=row.secrecy_bps_hz,
            iterations=row.iterations,
            seconds=row.seconds,
        )
        for row in run.results
    ]
    return group_trials(trials)
