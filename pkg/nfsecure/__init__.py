import logging

import sqlalchemy
from flask import Flask
from flask.logging import default_handler

from .extensions import db, init_extensions


def _configure_logging(app):
    """Route library loggers through Flask's handler at the configured level."""
    level = app.config.get("NFSECURE_LOG_LEVEL", "INFO")
    app.logger.setLevel(level)
    library = logging.getLogger("nfsecure")
    library.setLevel(level)
    if default_handler not in library.handlers:
        library.addHandler(default_handler)


def create_app(overrides=None):
    app = Flask(__name__)

    # Load config
    app.config.from_object("config.Config")
    if overrides:
        app.config.update(overrides)

    _configure_logging(app)

    # Init ALL extensions in ONE place
    init_extensions(app)

    from . import models  # noqa

    # Register blueprints
    from .experiments import bp as experiments_bp
    app.register_blueprint(experiments_bp)

    from .results import bp as results_bp
    app.register_blueprint(results_bp)

    # Ensure the results database exists
    with app.app_context():
        try:
            db.create_all()
        except sqlalchemy.exc.SQLAlchemyError:
            app.logger.exception("Database initialization failed.")
            raise

    return app
