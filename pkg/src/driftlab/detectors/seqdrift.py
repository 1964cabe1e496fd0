"""SeqDrift sequential hypothesis-test detectors (variants 1 and 2).

References: S. Sakthithasan, R. Pears, Y. S. Koh, "One pass concept change
detection for data streams", PAKDD 2013 (SeqDrift1) and R. Pears,
S. Sakthithasan, Y. S. Koh, "Detecting concept change in dynamic data
streams", Machine Learning 97, 2014 (SeqDrift2). Data is consumed in
fixed-size blocks; at each block boundary the mean of the newest block is
tested against the mean of an older repository using the empirical
Bernstein bound of Maurer and Pontil ("Empirical Bernstein bounds and
sample-variance penalization", COLT 2009). SeqDrift1 retains every older
sample since the last change; SeqDrift2 keeps a fixed-capacity reservoir
sample (Vitter's algorithm R) of the older data, which bounds memory.
Inputs are squashed to (0, 1) for the bound's range assumption.
"""

from __future__ import annotations

import math
import random

from ..errors import ConfigError
from .base import DriftDetector, Status, require_unit_interval


def _bernstein_eps(values: list[float], confidence: float) -> float:
    """Empirical Bernstein deviation bound for the mean of [0,1] samples."""
    n = len(values)
    if n < 2:
        return math.inf
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    log_term = math.log(2.0 / confidence)
    return math.sqrt(2.0 * var * log_term / n) + 7.0 * log_term / (3.0 * (n - 1))


class _SeqDriftBase(DriftDetector):
    BOUNDED_INPUT = True

    def __init__(
        self,
        block_size: int = 200,
        delta: float = 0.01,
        transform: str = "standardized",
    ):
        if block_size < 2:
            raise ConfigError("parameter 'block_size' must be >= 2")
        self.block_size = int(block_size)
        self.delta = require_unit_interval("delta", delta)
        self.MIN_SAMPLES = 2 * self.block_size
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._left: list[float] = []
        self._right: list[float] = []
        self._after_reset()

    def _after_reset(self) -> None:
        pass

    def _absorb(self, block: list[float]) -> None:
        raise NotImplementedError

    def _update(self, x: float) -> tuple[Status, float]:
        self._right.append(x)
        if len(self._right) < self.block_size:
            return Status.STABLE, 0.0
        block = self._right
        self._right = []
        if len(self._left) >= 2:
            mean_left = sum(self._left) / len(self._left)
            mean_right = sum(block) / len(block)
            gap = abs(mean_right - mean_left)
            eps = _bernstein_eps(self._left, self.delta) + _bernstein_eps(
                block, self.delta
            )
            if gap > eps:
                return Status.DRIFT, gap
            self._absorb(block)
            return Status.STABLE, gap
        self._absorb(block)
        return Status.STABLE, 0.0


class SeqDrift1(_SeqDriftBase):
    kind = "seqdrift1"

    def _absorb(self, block: list[float]) -> None:
        self._left.extend(block)


class SeqDrift2(_SeqDriftBase):
    kind = "seqdrift2"

    def __init__(
        self,
        block_size: int = 200,
        delta: float = 0.01,
        capacity: int | None = None,
        seed: int = 0,
        transform: str = "standardized",
    ):
        capacity = int(capacity) if capacity is not None else int(block_size)
        if capacity < 2:
            raise ConfigError("parameter 'capacity' must be >= 2")
        self.capacity = capacity
        self.seed = int(seed)
        super().__init__(block_size=block_size, delta=delta, transform=transform)

    def _after_reset(self) -> None:
        self._rng = random.Random(self.seed)
        self._seen = 0

    def _absorb(self, block: list[float]) -> None:
        # Vitter's algorithm R over all absorbed samples
        for value in block:
            self._seen += 1
            if len(self._left) < self.capacity:
                self._left.append(value)
            else:
                j = self._rng.randrange(self._seen)
                if j < self.capacity:
                    self._left[j] = value
