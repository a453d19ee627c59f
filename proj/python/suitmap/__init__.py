"""Raster multi-criteria site suitability with learned criterion weights."""

from ._suitmap import *  # noqa: F401,F403
from ._suitmap import SuitmapError, ConfigError, FormatError, AlignmentError  # noqa: F401

__version__ = "0.1.0"
