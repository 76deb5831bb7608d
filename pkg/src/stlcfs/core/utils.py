"""
Utility functions shared across modules: logging setup, number formatting.
"""

import logging
from typing import Optional

from stlcfs.core.config import settings

LOG_FORMAT = "%(levelname)s %(name)s - %(message)s"


def configure_logging(level: Optional[int] = None) -> None:
    """
    Configure the root logger once for a CLI process.
    The level defaults to the STL_CFS_LOG setting.
    """
    logging.basicConfig(
        level=level if level is not None else settings.log_level(),
        format=LOG_FORMAT,
    )


def format_float(value: float) -> str:
    """
    Shortest decimal string that round-trips to the same double.
    """
    return repr(float(value))
