"""Stochastic network calculus bounds and slotted simulation for 802.11 DCF."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
