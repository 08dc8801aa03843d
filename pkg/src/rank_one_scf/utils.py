"""
Utility functions for the rank-one approximation package.
"""

import logging
import math
import re
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from .exceptions import ConfigurationError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
PACKAGE_LOGGER = __name__.rsplit(".", 1)[0]


def _package_logger() -> logging.Logger:
    root = logging.getLogger(PACKAGE_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.setLevel(logging.WARNING)
    return root


def get_logger(name: str) -> logging.Logger:
    """
    Named logger under the package logger.

    The package logger owns the single stream handler and the level; named loggers
    stay at NOTSET so ``set_log_level`` reaches loggers created before and after it.

    Args:
        name: Logger name, usually ``__name__`` or ``f"{__name__}.{cls.__name__}"``

    Returns:
        Logger
    """
    _package_logger()
    return logging.getLogger(name)


def set_log_level(level: str) -> None:
    """Apply a level name (``"INFO"``, ``"debug"``...) to the package logger."""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ConfigurationError(f"Unknown log level: {level}")
    _package_logger().setLevel(numeric)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Counter-based random generator for a (seed, stream) pair.

    The seed fills the low and the stream the high word of the Philox key, so every
    restart gets its own reproducible stream.

    Args:
        seed: Experiment seed, 0 <= seed < 2**64
        stream: Sub-stream index (restart number), 0 <= stream < 2**64

    Returns:
        numpy Generator
    """
    if not 0 <= seed < (1 << 64) or not 0 <= stream < (1 << 64):
        raise ConfigurationError(f"Seed/stream out of range: {seed}, {stream}")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


def round_sig(value: float, digits: int = 3) -> float:
    """Round to a number of significant digits (0 stays 0)."""
    if value == 0 or not math.isfinite(value):
        return value
    return round(value, digits - 1 - int(math.floor(math.log10(abs(value)))))


class PhaseTimer:
    """Accumulates monotonic wall time per named phase."""

    def __init__(self) -> None:
        self._ns: Dict[str, int] = {}

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter_ns()
        try:
            yield
        finally:
            self._ns[name] = self._ns.get(name, 0) + time.perf_counter_ns() - start

    def seconds(self, name: str) -> float:
        return self._ns.get(name, 0) * 1e-9

    def reset(self) -> None:
        self._ns.clear()


def parse_dims(text: str) -> Tuple[int, ...]:
    """
    Parse a dimension vector such as ``"30x30x30"`` or ``"20,20,20,20"``.

    Args:
        text: Dimension string

    Returns:
        Tuple of positive integers
    """
    parts = [p for p in re.split(r"[x,\s]+", text.strip().lower()) if p]
    if not parts:
        raise ConfigurationError(f"Empty dimension string: {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"Invalid dimension string: {text!r}")
    if any(n < 1 for n in dims):
        raise ConfigurationError(f"Dimensions must be positive: {text!r}")
    return dims


def format_dims(dims: Sequence[int]) -> str:
    """Format a dimension vector as ``30x30x30``."""
    return "x".join(str(int(n)) for n in dims)
