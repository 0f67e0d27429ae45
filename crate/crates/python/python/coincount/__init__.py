"""Coincidence-count statistics and Z-scores for pairs of binary point processes."""

from ._coincount import *  # noqa: F401,F403
from ._coincount import __version__  # noqa: F401
