from flask import Blueprint

bp = Blueprint("results", __name__, url_prefix="/runs")

from . import routes  # noqa
