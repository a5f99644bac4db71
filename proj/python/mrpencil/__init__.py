"""Matrix-pencil analysis of multirate DAE integration schemes."""

from ._mrpencil import *  # noqa: F401,F403
from ._mrpencil import __doc__  # noqa: F401
