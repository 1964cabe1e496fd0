"""SEED: block-based adaptive windowing with block compression.

Reference: D. T. J. Huang, Y. S. Koh, G. Dobbie, R. Pears, "Detecting
volatility shift in data streams" (the SEED detector), ICDM 2014. Values
accumulate into fixed-size blocks; at every completed block each block
boundary is tested as an old/new split with a Hoeffding bound (confidence
divided across the boundaries tested), and adjacent blocks whose means are
statistically indistinguishable are merged ("compressed") to cap memory and
sharpen the splits. Inputs are squashed to (0, 1) for the bound's
bounded-support assumption.
"""

from __future__ import annotations

import math

from ..errors import ConfigError
from .base import DriftDetector, Status, require_unit_interval


def _hoeffding_eps(n0: int, n1: int, confidence: float) -> float:
    return math.sqrt(
        (1.0 / (2.0 * n0) + 1.0 / (2.0 * n1)) * math.log(4.0 / confidence)
    )


class Seed(DriftDetector):
    kind = "seed"
    BOUNDED_INPUT = True

    def __init__(
        self,
        block_size: int = 32,
        delta: float = 0.05,
        compress_delta: float = 0.5,
        max_blocks: int = 256,
        transform: str = "standardized",
    ):
        if block_size < 2:
            raise ConfigError("parameter 'block_size' must be >= 2")
        if max_blocks < 2:
            raise ConfigError("parameter 'max_blocks' must be >= 2")
        self.block_size = int(block_size)
        self.delta = require_unit_interval("delta", delta)
        self.compress_delta = require_unit_interval("compress_delta", compress_delta)
        self.max_blocks = int(max_blocks)
        self.MIN_SAMPLES = 2 * self.block_size
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._blocks: list[list[float]] = []  # (n, total) pairs, oldest first
        self._cur_n = 0
        self._cur_sum = 0.0

    def _check(self) -> float | None:
        k = len(self._blocks)
        if k < 2:
            return None
        total_n = sum(b[0] for b in self._blocks)
        total_sum = sum(b[1] for b in self._blocks)
        confidence = self.delta / (k - 1)
        n0 = 0
        sum0 = 0.0
        for block in self._blocks[:-1]:
            n0 += block[0]
            sum0 += block[1]
            n1 = total_n - n0
            diff = abs(sum0 / n0 - (total_sum - sum0) / n1)
            if diff > _hoeffding_eps(n0, n1, confidence):
                return diff
        return None

    def _compress(self) -> None:
        merged: list[list[float]] = []
        for block in self._blocks:
            if merged:
                prev = merged[-1]
                eps = _hoeffding_eps(int(prev[0]), int(block[0]), self.compress_delta)
                if abs(prev[1] / prev[0] - block[1] / block[0]) < eps:
                    prev[0] += block[0]
                    prev[1] += block[1]
                    continue
            merged.append(list(block))
        while len(merged) > self.max_blocks:
            merged[0][0] += merged[1][0]
            merged[0][1] += merged[1][1]
            del merged[1]
        self._blocks = merged

    def _update(self, x: float) -> tuple[Status, float]:
        self._cur_n += 1
        self._cur_sum += x
        if self._cur_n < self.block_size:
            return Status.STABLE, 0.0
        self._blocks.append([self._cur_n, self._cur_sum])
        self._cur_n = 0
        self._cur_sum = 0.0
        diff = self._check()
        if diff is not None:
            return Status.DRIFT, diff
        self._compress()
        return Status.STABLE, 0.0
