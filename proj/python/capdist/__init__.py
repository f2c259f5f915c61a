"""Capacity-distortion solver for joint communication and state estimation.

Rates are in nats per channel use unless noted otherwise.
"""

from ._core import *  # noqa: F401,F403
from ._core import CapdistError, ConvergenceError, InfeasibleError, InputError

__version__ = "0.1.0"
