"""Shared stepwise contract for streaming drift detectors.

Every detector consumes one finite value per step and reports stable,
warning or drift. On drift the instance re-arms itself: internal state
(including the input transform) returns to the freshly-constructed state, so
feeding the post-trigger suffix to a new instance reproduces the run.

The configured input transform is applied before the detector statistic:
`raw` passes values through, `abs` takes magnitudes, `standardized` centers
and scales by running estimates (Welford). Detectors whose concentration
bounds require bounded support additionally squash their input to (0, 1)
with a logistic map; those classes set BOUNDED_INPUT and document it.
"""

from __future__ import annotations

import math
from enum import Enum

from ..errors import ConfigError, ValidationError

TRANSFORMS = ("raw", "abs", "standardized")


class Status(str, Enum):
    STABLE = "stable"
    WARNING = "warning"
    DRIFT = "drift"


class InputTransform:
    """Online input preprocessing; part of detector state, resets with it."""

    def __init__(self, kind: str):
        if kind not in TRANSFORMS:
            raise ConfigError(f"transform must be one of {TRANSFORMS}")
        self.kind = kind
        self.reset()

    def reset(self) -> None:
        self._n = 0
        self._mean = 0.0
        self._m2 = 0.0

    def apply(self, value: float) -> float:
        if self.kind == "raw":
            return value
        if self.kind == "abs":
            return abs(value)
        # standardized: Welford update, then scale by the running stats
        self._n += 1
        delta = value - self._mean
        self._mean += delta / self._n
        self._m2 += delta * (value - self._mean)
        if self._n < 2:
            return 0.0
        sd = math.sqrt(self._m2 / (self._n - 1))
        if sd < 1e-12:
            return 0.0
        return (value - self._mean) / sd


def squash01(x: float) -> float:
    """Logistic map to (0, 1) for detectors with bounded-support bounds."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-min(x, 500.0)))
    z = math.exp(max(x, -500.0))
    return z / (1.0 + z)


class DriftDetector:
    """Base class: transform plumbing, warm-up gate, auto-reset on drift."""

    kind: str = "base"
    #: no drift/warning is emitted before this many consumed samples
    MIN_SAMPLES: int = 1
    BOUNDED_INPUT: bool = False

    def __init__(self, transform: str = "standardized"):
        self.transform = InputTransform(transform)
        self.samples_seen = 0
        self.status = Status.STABLE
        self.last_statistic = 0.0

    def reset(self) -> None:
        """Return to the freshly-constructed state."""
        self.transform.reset()
        self.samples_seen = 0
        self.status = Status.STABLE
        self.last_statistic = 0.0
        self._reset()

    def step(self, value: float) -> Status:
        """Consume one sample; returns the status this sample produced.

        After a drift return the instance has already re-armed (fresh
        state); the caller owns global sample indexing.
        """
        if not math.isfinite(value):
            raise ValidationError("detector input must be finite")
        self.samples_seen += 1
        x = self.transform.apply(value)
        if self.BOUNDED_INPUT:
            x = squash01(x)
        status, statistic = self._update(x)
        if self.samples_seen < self.MIN_SAMPLES:
            status = Status.STABLE
        self.last_statistic = statistic
        if status is Status.DRIFT:
            self.reset()
        else:
            self.status = status
        return status

    # subclass API ---------------------------------------------------------

    def _update(self, x: float) -> tuple[Status, float]:
        raise NotImplementedError

    def _reset(self) -> None:
        raise NotImplementedError


def require_positive(name: str, value: float) -> float:
    if not (value > 0) or not math.isfinite(value):
        raise ConfigError(f"parameter {name!r} must be strictly positive")
    return value


def require_unit_interval(name: str, value: float) -> float:
    if not (0 < value < 1):
        raise ConfigError(f"parameter {name!r} must lie in (0, 1)")
    return value
