import os

from flask.cli import FlaskGroup

from nfsecure import create_app

# Keep results beside the project unless told otherwise
base_dir = os.path.abspath(os.path.dirname(__file__))
os.environ.setdefault("NFSECURE_DATA_DIR", os.path.join(base_dir, "data"))


def _create():
    return create_app()


# Flask's own run/shell/routes commands are left out so `run` is the experiment command
cli = FlaskGroup(create_app=_create, add_default_commands=False)


if __name__ == "__main__":
    cli()
