"""Photon-pair statistics of an ac+dc biased tunnel junction.

Thin bindings over the C++ core: closed-form noise and pair statistics,
the detection-chain Monte Carlo, and the photo-assisted noise calibration.
All quantities are SI unless a name says otherwise (``*_kelvin2``).
"""

from ._tunnelpairs import *  # noqa: F401,F403
from ._tunnelpairs import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
