"""Synthetic benchmark corpora with injected ground truth.

Builds desk-scale residual series whose drift periods are known by
construction, for calibrating detectors and exercising the evaluation
stage end to end. Residuals here come from the noise-free power curve
rather than a trained ensemble, so corpus construction stays cheap while
the injected drifts still appear exactly where declared.
"""

from __future__ import annotations

import numpy as np

from .ensemble import ResidualSeries
from .errors import ConfigError
from .evaluation import LabelledPeriod
from .scada import DriftInjection, GeneratorConfig, TurbineSeries, generate_series, theoretical_power
from .timestamps import GRID_SECONDS


def perfect_model_residuals(
    series: TurbineSeries, config: GeneratorConfig
) -> ResidualSeries:
    """Residual of the observed power against the noise-free power curve."""
    predicted = theoretical_power(series.wind_speed, config)
    return ResidualSeries(
        turbine_id=series.turbine_id,
        timestamps=series.timestamps,
        actual=series.power.copy(),
        predicted=predicted,
        residual=series.power - predicted,
        n_members=np.ones(len(series), dtype=np.int64),
    )


def make_synthetic_corpus(
    n_series: int = 20,
    seed: int = 0,
    n_records: int = 4000,
    injections_per_series: tuple[int, int] = (1, 2),
    noise_sd: float = 40.0,
) -> list[tuple[ResidualSeries, list[LabelledPeriod]]]:
    """Residual series with injected sudden/gradual power offsets as truth.

    Deterministic for a fixed seed. Injected offsets are 5-8 noise standard
    deviations so every period is genuinely detectable; periods within one
    series never overlap.
    """
    if n_series < 1:
        raise ConfigError("n_series must be >= 1")
    rng = np.random.default_rng(seed)
    corpus = []
    for idx in range(n_series):
        config = GeneratorConfig(
            seed=int(rng.integers(0, 2**31)),
            n_records=n_records,
            noise_sd=noise_sd,
        )
        span = n_records * GRID_SECONDS
        n_inj = int(rng.integers(injections_per_series[0], injections_per_series[1] + 1))
        # carve the span into as many equal slots as injections; one per slot
        injections = []
        slot = span // (n_inj + 1)
        for k in range(n_inj):
            lo = config.start + slot * (k + 1)
            length = int(rng.integers(60, 200)) * GRID_SECONDS
            start = int(lo // GRID_SECONDS) * GRID_SECONDS
            end = min(start + length, config.start + span - GRID_SECONDS)
            sign = -1.0 if rng.random() < 0.5 else 1.0
            amplitude = sign * noise_sd * rng.uniform(5.0, 8.0)
            kind = "sudden" if rng.random() < 0.7 else "gradual"
            injections.append(
                DriftInjection(
                    kind=kind, start=start, end=end, amplitude=float(amplitude)
                )
            )
        series, truth = generate_series(config, injections)
        series.turbine_id = f"corpus_{idx:03d}"
        residuals = perfect_model_residuals(series, config)
        periods = [
            LabelledPeriod(start=t.start, end=t.end, source="injected_ground_truth")
            for t in truth
        ]
        corpus.append((residuals, periods))
    return corpus
