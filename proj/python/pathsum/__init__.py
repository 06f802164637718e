"""Path-sum propagators for time-dependent Hamiltonians.

Times are in the units of the supplied frequencies; the spin-diffusion
functions use ms, rad/ms and angstrom.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
