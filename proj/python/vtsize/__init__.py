"""Multi-size try-on mask generation and garment size evaluation."""

from ._vtsize import *  # noqa: F401,F403
from ._vtsize import __version__  # noqa: F401
