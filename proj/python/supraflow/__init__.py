"""Consensus optimization flows on multiplex networks.

Thin re-export of the compiled ``_core`` module. Arrays come back as numpy
arrays; stacked vectors are layer-major (replica (i, alpha) at alpha * N + i).
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
