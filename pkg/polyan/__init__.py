"""Polyanalytic functions: exact algebra, sampled verification, hypersurface discs."""

from loguru import logger

logger.disable("polyan")

from . import config, errors  # noqa: E402

__version__ = "0.1.0"
