"""Run reebvolmin as `python -m reebvolmin`."""

from reebvolmin.cli import app

if __name__ == "__main__":
    app()
