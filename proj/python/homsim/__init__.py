"""Spectrally resolved Hong-Ou-Mandel interference simulator."""

from ._homsim import *  # noqa: F401,F403
from ._homsim import __version__, run, parse_config


def run_file(path, **overrides):
    """Parse a config file and run it; keyword overrides as in parse_config."""
    with open(path, encoding="utf-8") as fh:
        return run(parse_config(fh.read(), **overrides))
