"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and DataError to exit code 3;
everything else is a programming error and escapes as a traceback.
"""


class ConfigError(Exception):
    """Invalid experiment configuration (bad grids, unknown keys, ...)."""


class DataError(Exception):
    """Invalid data on disk or at an API boundary (bad CSV cell, length mismatch, ...)."""
