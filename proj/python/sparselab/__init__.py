"""Sparse support recovery laboratory.

Thin wrapper exposing the compiled core. Everything lives in the
``_sparselab`` extension; this package re-exports it under a stable name.
"""

from _sparselab import *  # noqa: F401,F403
from _sparselab import __doc__  # noqa: F401
