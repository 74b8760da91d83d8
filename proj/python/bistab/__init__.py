"""Driven dispersive cavity-transmon bistability simulator."""

from bistab._bistab import *  # noqa: F401,F403
from bistab._bistab import __version__  # noqa: F401
