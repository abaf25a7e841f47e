"""GFEM solver for the 1D Burgers equation."""

from ._gfem import *  # noqa: F401,F403
from ._gfem import __doc__  # noqa: F401
