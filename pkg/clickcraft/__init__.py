import logging

__version__ = "0.1.0"

_log: logging.Logger = logging.getLogger(__name__)
