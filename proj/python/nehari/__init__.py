from ._core import *  # noqa: F401,F403
from ._core import Error, ProjectionError, __doc__  # noqa: F401
