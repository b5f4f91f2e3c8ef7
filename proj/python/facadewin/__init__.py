"""Facade window detection toolkit.

Deterministic dataset preparation, detector configuration planning,
detection evaluation (AP50/precision/recall) and inference tuning, with a
synthetic facade oracle for desk-scale verification. The heavy lifting
lives in the compiled ``facadewin._core`` extension.
"""

from facadewin._core import *  # noqa: F401,F403
from facadewin._core import __version__  # noqa: F401
