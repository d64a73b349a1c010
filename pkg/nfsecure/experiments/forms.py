import numpy as np
from wtforms import BooleanField, FloatField, Form, IntegerField, StringField
from wtforms.validators import NumberRange, ValidationError

from nfsecure.errors import ConfigError
from .config import SCHEMES, SWEEP_AXES, ExperimentConfig

# Polar angle upper bound with rounding slack
PI_SLACK = float(np.pi) + 1e-12


class ExperimentConfigForm(Form):
    num_antennas = IntegerField("M", validators=[NumberRange(min=1)])
    num_rf = IntegerField("N", validators=[NumberRange(min=1)])
    num_streams = IntegerField("K", validators=[NumberRange(min=1)])
    user_elements = IntegerField("L_U", validators=[NumberRange(min=2)])
    eve_elements = IntegerField("L_E", validators=[NumberRange(min=2)])
    region_wavelengths = FloatField("A / lambda", validators=[NumberRange(min=1e-9)])
    wavelength = FloatField("Wavelength", validators=[NumberRange(min=1e-9)])
    min_spacing = FloatField("d_min")
    power_dbm = FloatField("P_B (dBm)", validators=[NumberRange(min=-100.0, max=100.0)])
    noise_dbm = FloatField("Noise (dBm)", validators=[NumberRange(min=-200.0, max=50.0)])
    user_r = FloatField("User distance", validators=[NumberRange(min=1e-6)])
    user_theta = FloatField("User azimuth")
    user_phi = FloatField("User elevation", validators=[NumberRange(min=0.0, max=PI_SLACK)])
    eve_r = FloatField("Eavesdropper distance", validators=[NumberRange(min=1e-6)])
    eve_theta = FloatField("Eavesdropper azimuth")
    eve_phi = FloatField("Eavesdropper elevation", validators=[NumberRange(min=0.0, max=PI_SLACK)])
    eavesdropper = BooleanField("Eavesdropper present")
    schemes = StringField("Schemes")
    sweep_axis = StringField("Sweep axis")
    trials = IntegerField("Trials", validators=[NumberRange(min=1)])
    seed = IntegerField("Seed", validators=[NumberRange(min=0)])
    eps3 = FloatField("Outer tolerance", validators=[NumberRange(min=1e-15)])
    max_iters = IntegerField("Outer iteration cap", validators=[NumberRange(min=1)])
    mo_max_iters = IntegerField("MO iteration cap", validators=[NumberRange(min=1)])
    mm_max_iters = IntegerField("MM iteration cap", validators=[NumberRange(min=1)])

    def validate_schemes(self, field):
        tags = [s for s in (field.data or "").split(",") if s]
        if not tags:
            raise ValidationError("At least one scheme is required.")
        unknown = [s for s in tags if s not in SCHEMES]
        if unknown:
            raise ValidationError(f"Unknown scheme(s): {', '.join(unknown)}.")

    def validate_sweep_axis(self, field):
        if field.data and field.data not in SWEEP_AXES:
            raise ValidationError(f"Unknown sweep axis {field.data!r}.")

    def validate_min_spacing(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError("d_min must be positive.")

    def validate_num_rf(self, field):
        if self.num_streams.data is not None and field.data is not None and field.data < self.num_streams.data:
            raise ValidationError("N must be at least K.")


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    """Run the form validators over a config; raises ConfigError listing every problem."""
    data = config.to_dict()
    data["schemes"] = ",".join(config.schemes)
    data["sweep_axis"] = config.sweep_axis or ""
    form = ExperimentConfigForm(data=data)
    problems = []
    if not form.validate():
        for name, errors in form.errors.items():
            problems.extend(f"{name}: {err}" for err in errors)
    if config.sweep_axis and not config.sweep_values:
        problems.append("sweep_values: a sweep needs at least one value.")
    if config.sweep_values and not config.sweep_axis:
        problems.append("sweep_values: values given without a sweep axis.")
    if problems:
        raise ConfigError("Invalid experiment configuration: " + "; ".join(problems))
    return config
