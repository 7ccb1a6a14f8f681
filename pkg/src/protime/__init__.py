"""Toolkit for timed message-passing protocols: parse, typecheck,
execute, and certify."""

__version__ = "0.1.0"

from . import devices as _devices  # noqa: F401  (registers the device language)
from . import proclang as _proclang  # noqa: F401  (registers the term language)
