from flask import Blueprint

# CLI only: commands attach to the top-level group
bp = Blueprint("experiments", __name__, cli_group=None)

from . import commands  # noqa
