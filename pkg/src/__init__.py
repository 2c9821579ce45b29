"""Multiscale network entropy source package."""

__version__ = "1.0.0"

# Bumped whenever the trajectory CSV columns change.
CSV_SCHEMA_VERSION = 2
