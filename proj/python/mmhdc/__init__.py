"""Maximum-margin hyperdimensional classifiers.

Thin Python front end over the C++ core in ``mmhdc._core``.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
