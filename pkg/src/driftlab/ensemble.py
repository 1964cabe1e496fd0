"""Batch-trained ELM ensemble and its residual series.

The series is cut into contiguous fixed-size batches; each batch trains one
ELM with a random validation split and carries a certainty filter built from
its training inputs. At prediction time only members whose filter accepts a
point contribute, weighted by inverse validation error; the difference
between actual and combined predicted power is the residual stream that
experts label and detectors consume.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from . import elm
from .elm import ELMModel, ELMParams
from .errors import (
    ConfigError,
    EmptyInputError,
    FormatError,
    InsufficientDataError,
    NoUsableModelError,
    ShapeMismatchError,
    ValidationError,
)
from .scada import PREDICTOR_CHANNELS, TurbineSeries
from .timestamps import format_rfc3339, parse_rfc3339

RESIDUAL_CSV_HEADER = "timestamp,actual,predicted,residual,n_members"

#: validation RMSE floor when converting to member weights
WEIGHT_RMSE_FLOOR = 1e-6

#: default random-feature sharpness per predictor channel: the power response
#: is steep in wind speed and nearly flat in ambient temperature, so
#: temperature gets a small scale (sharp spurious structure there would turn
#: into cross-season bias)
CHANNEL_SHARPNESS = {"ambient_temp": 0.5, "wind_speed": 4.0, "turbulence": 1.0}


@dataclass(frozen=True)
class Batch:
    """A contiguous slice of the parent series with its train/validation split."""

    index: int
    start: int  # first row (inclusive)
    stop: int  # past-the-end row
    train_rows: np.ndarray
    validation_rows: np.ndarray


def partition_batches(
    series_or_length, batch_size: int, validation_fraction: float, seed: int
) -> list[Batch]:
    """Split a series into contiguous batches with per-batch validation rows.

    The trailing partial batch is dropped when shorter than batch_size / 2,
    kept otherwise. Validation rows are sampled uniformly without
    replacement, deterministically from `seed` and the batch index.
    """
    n = series_or_length if isinstance(series_or_length, int) else len(series_or_length)
    if batch_size < 20:
        raise ConfigError("batch_size must be >= 20")
    if not (0 < validation_fraction < 0.5):
        raise ConfigError("validation_fraction must lie in (0, 0.5)")
    if n < batch_size / 2:
        raise InsufficientDataError(
            f"series of {n} rows is shorter than half a batch ({batch_size / 2:g})"
        )
    bounds = []
    start = 0
    while start < n:
        stop = min(start + batch_size, n)
        if stop - start >= batch_size / 2:
            bounds.append((start, stop))
        start = stop
    batches = []
    for idx, (lo, hi) in enumerate(bounds):
        size = hi - lo
        n_val = max(1, int(validation_fraction * size + 1e-9))
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        val = np.sort(rng.choice(size, size=n_val, replace=False)) + lo
        mask = np.ones(size, dtype=bool)
        mask[val - lo] = False
        train = np.arange(lo, hi)[mask]
        batches.append(
            Batch(index=idx, start=lo, stop=hi, train_rows=train, validation_rows=val)
        )
    return batches


@dataclass
class CertaintyFilter:
    """Per-dimension occupancy histogram gate over the training inputs.

    A query point is certain when, in every dimension, it falls inside the
    training [min, max] and its bin holds at least `min_occupancy` training
    samples. A value sitting exactly on an interior bin edge belongs to the
    upper bin; the top bin is closed above. Degenerate dimensions (training
    min == max) accept only values within 1e-9 of that constant.
    """

    edges: list[np.ndarray]  # per dim, len bins + 1 (strictly increasing)
    counts: list[np.ndarray]  # per dim, len bins
    min_occupancy: int
    degenerate: np.ndarray  # bool per dim
    constants: np.ndarray  # per dim, the constant for degenerate dims

    @property
    def n_dims(self) -> int:
        return len(self.edges)

    def accept_mask(self, X: np.ndarray) -> np.ndarray:
        """Vectorized certainty decision for each row of X."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_dims:
            raise ShapeMismatchError(
                f"expected {self.n_dims} columns, got {X.shape[1] if X.ndim == 2 else X.ndim}"
            )
        ok = np.ones(len(X), dtype=bool)
        for dim in range(self.n_dims):
            x = X[:, dim]
            if self.degenerate[dim]:
                ok &= np.abs(x - self.constants[dim]) <= 1e-9
                continue
            edges = self.edges[dim]
            counts = self.counts[dim]
            in_range = (x >= edges[0]) & (x <= edges[-1])
            # interior edge values go to the upper bin; top bin closed above
            idx = np.searchsorted(edges, x, side="right") - 1
            idx = np.clip(idx, 0, len(counts) - 1)
            ok &= in_range & (counts[idx] >= self.min_occupancy)
        return ok


def build_certainty_filter(
    X_train: np.ndarray, bins: int = 20, min_occupancy: int = 3
) -> CertaintyFilter:
    """Build per-dimension equal-width occupancy histograms over the data."""
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise EmptyInputError("X_train must be a non-empty 2-D matrix")
    if bins < 2:
        raise ConfigError("bins must be >= 2")
    if min_occupancy < 1:
        raise ConfigError("min_occupancy must be >= 1")
    edges, counts = [], []
    degenerate = np.zeros(X.shape[1], dtype=bool)
    constants = np.zeros(X.shape[1])
    for dim in range(X.shape[1]):
        lo, hi = float(X[:, dim].min()), float(X[:, dim].max())
        if lo == hi:
            degenerate[dim] = True
            constants[dim] = lo
            edges.append(np.array([lo, hi]))
            counts.append(np.array([len(X)]))
            continue
        e = np.linspace(lo, hi, bins + 1)
        c, _ = np.histogram(X[:, dim], bins=e)
        edges.append(e)
        counts.append(c)
    return CertaintyFilter(
        edges=edges,
        counts=counts,
        min_occupancy=min_occupancy,
        degenerate=degenerate,
        constants=constants,
    )


def is_certain(filt: CertaintyFilter, x: Sequence[float]) -> bool:
    """True iff every coordinate of x lands in a sufficiently occupied bin."""
    return bool(filt.accept_mask(np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass(frozen=True)
class EnsembleConfig:
    """Knobs for batch partitioning, member training and combination."""

    batch_size: int = 4320  # one month of 10-minute data
    validation_fraction: float = 0.2
    bins: int = 20
    min_occupancy: int = 3
    rejection_rmse: float = math.inf  # exclude members with worse validation RMSE
    hidden_width: int = 400
    activation: str = "sigmoid"
    ridge_lambda: float = 1e-3
    #: per-predictor random-feature sharpness; None picks CHANNEL_SHARPNESS
    #: values by predictor name
    weight_scale: float | tuple[float, ...] | None = None
    #: estimate the ensemble's level bias on held-out (leave-own-batch-out)
    #: combinations and fold the constant into the member intercepts; keeps
    #: the combined residual centered without touching relative weights
    center_bias: bool = True
    predictors: tuple[str, ...] = PREDICTOR_CHANNELS


@dataclass
class EnsembleMember:
    model: ELMModel
    cert_filter: CertaintyFilter
    validation_rmse: float
    weight: float  # 1 / max(validation_rmse, floor); normalized at combine time
    batch_index: int = -1  # which batch trained this member


@dataclass
class EnsembleModel:
    members: list[EnsembleMember]
    predictors: tuple[str, ...]
    combination: str = "inverse_validation_rmse"

    def __post_init__(self):
        if not self.members:
            raise NoUsableModelError("ensemble has no members")
        if any(m.weight <= 0 for m in self.members):
            raise ValidationError("member weights must be positive")


def train_ensemble(
    series: TurbineSeries,
    config: EnsembleConfig = EnsembleConfig(),
    seed: int = 0,
) -> EnsembleModel:
    """Train one ELM + certainty filter per batch and assemble the ensemble.

    Member weight is 1 / validation RMSE (floored at 1e-6); members whose
    validation RMSE exceeds config.rejection_rmse are excluded. Deterministic
    for a fixed seed: the validation split and each member's hidden weights
    derive from (seed, batch index).
    """
    X = series.predictor_matrix(config.predictors)
    y = series.power
    weight_scale = config.weight_scale
    if weight_scale is None:
        weight_scale = tuple(
            CHANNEL_SHARPNESS.get(name, 1.0) for name in config.predictors
        )
    batches = partition_batches(
        len(series), config.batch_size, config.validation_fraction, seed
    )
    members = []
    for batch in batches:
        member_seed = int(
            np.random.SeedSequence([seed, batch.index, 1]).generate_state(1)[0]
        )
        params = ELMParams(
            hidden_width=config.hidden_width,
            activation=config.activation,
            ridge_lambda=config.ridge_lambda,
            weight_scale=weight_scale,
            input_dim=X.shape[1],
            seed=member_seed,
        )
        model = elm.train_elm(X[batch.train_rows], y[batch.train_rows], params)
        filt = build_certainty_filter(
            X[batch.train_rows], bins=config.bins, min_occupancy=config.min_occupancy
        )
        rmse = elm.validation_rmse(
            model, X[batch.validation_rows], y[batch.validation_rows]
        )
        if rmse > config.rejection_rmse:
            continue
        members.append(
            EnsembleMember(
                model=model,
                cert_filter=filt,
                validation_rmse=rmse,
                weight=1.0 / max(rmse, WEIGHT_RMSE_FLOOR),
                batch_index=batch.index,
            )
        )
    if not members:
        raise NoUsableModelError(
            f"all {len(batches)} members exceeded rejection_rmse={config.rejection_rmse}"
        )
    ens = EnsembleModel(members=members, predictors=config.predictors)
    if config.center_bias and len(members) > 1:
        _center_bias(ens, X, y, batches)
    return ens


def _center_bias(
    ens: EnsembleModel, X: np.ndarray, y: np.ndarray, batches: list[Batch]
) -> None:
    """Zero the held-out combined level error by shifting member intercepts.

    Each point is predicted by the certain members that did NOT train on its
    batch; the mean of those held-out residuals is a cross-validated estimate
    of the ensemble's level bias. Adding the constant to every member's
    intercept shifts combined predictions by exactly that amount (weights
    renormalize to one) and leaves relative weighting untouched.
    """
    n = len(X)
    owner = np.full(n, -1)
    for batch in batches:
        owner[batch.start : batch.stop] = batch.index
    num = np.zeros(n)
    den = np.zeros(n)
    for member in ens.members:
        mask = member.cert_filter.accept_mask(X) & (owner != member.batch_index)
        if not mask.any():
            continue
        pred = elm.predict_elm(member.model, X)
        num += np.where(mask, member.weight * pred, 0.0)
        den += np.where(mask, member.weight, 0.0)
    covered = den > 0
    if not covered.any():
        return
    shift = float(np.mean(y[covered] - num[covered] / den[covered]))
    for member in ens.members:
        member.model.target_mean += shift


@dataclass
class ResidualSeries:
    """Actual minus ensemble-predicted power, with gaps where no member is certain.

    predicted/residual hold NaN exactly where n_members is zero; gaps are
    data, not errors, and stay unfilled.
    """

    turbine_id: str
    timestamps: np.ndarray  # int64
    actual: np.ndarray
    predicted: np.ndarray  # NaN when missing
    residual: np.ndarray  # NaN when missing
    n_members: np.ndarray  # int

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.actual = np.asarray(self.actual, dtype=np.float64)
        self.predicted = np.asarray(self.predicted, dtype=np.float64)
        self.residual = np.asarray(self.residual, dtype=np.float64)
        self.n_members = np.asarray(self.n_members, dtype=np.int64)
        n = len(self.timestamps)
        for name in ("actual", "predicted", "residual", "n_members"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"column {name} length mismatch")
        missing = self.n_members == 0
        if not np.array_equal(missing, np.isnan(self.residual)):
            raise ValidationError("residual must be missing iff no member is certain")

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def present(self) -> np.ndarray:
        return self.n_members > 0

    def observed(self) -> tuple[np.ndarray, np.ndarray]:
        """(timestamps, residuals) restricted to non-missing entries."""
        m = self.present
        return self.timestamps[m], self.residual[m]


def ensemble_residuals(
    ens: EnsembleModel, series: TurbineSeries, turbine_id: str | None = None
) -> ResidualSeries:
    """Combine certain members per timestamp and form actual - predicted.

    Weights are renormalized over the members whose filter accepts each
    point; entries where no member is certain stay missing.
    """
    X = series.predictor_matrix(ens.predictors)
    n = len(series)
    num = np.zeros(n)
    den = np.zeros(n)
    n_members = np.zeros(n, dtype=np.int64)
    for member in ens.members:
        mask = member.cert_filter.accept_mask(X)
        if not mask.any():
            continue
        pred = elm.predict_elm(member.model, X)
        num += np.where(mask, member.weight * pred, 0.0)
        den += np.where(mask, member.weight, 0.0)
        n_members += mask
    predicted = np.full(n, np.nan)
    covered = den > 0
    predicted[covered] = num[covered] / den[covered]
    residual = series.power - predicted
    return ResidualSeries(
        turbine_id=turbine_id or series.turbine_id,
        timestamps=series.timestamps,
        actual=series.power.copy(),
        predicted=predicted,
        residual=residual,
        n_members=n_members,
    )


def write_residual_csv(res: ResidualSeries, stream: IO[str]) -> None:
    """Serialize to `timestamp,actual,predicted,residual,n_members` CSV."""
    stream.write(RESIDUAL_CSV_HEADER + "\n")
    for i in range(len(res)):
        if res.n_members[i] > 0:
            pred = repr(float(res.predicted[i]))
            resid = repr(float(res.residual[i]))
        else:
            pred = resid = ""
        stream.write(
            f"{format_rfc3339(int(res.timestamps[i]))},"
            f"{float(res.actual[i])!r},{pred},{resid},{int(res.n_members[i])}\n"
        )


def residual_csv_text(res: ResidualSeries) -> str:
    buf = io.StringIO()
    write_residual_csv(res, buf)
    return buf.getvalue()


def parse_residual_csv(source: IO[str] | str, turbine_id: str) -> ResidualSeries:
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != RESIDUAL_CSV_HEADER:
        raise FormatError(f"expected header {RESIDUAL_CSV_HEADER!r}")
    ts, actual, predicted, residual, n_members = [], [], [], [], []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise FormatError(f"bad residual row: {line!r}")
        ts.append(parse_rfc3339(parts[0]))
        actual.append(float(parts[1]))
        predicted.append(float(parts[2]) if parts[2] else np.nan)
        residual.append(float(parts[3]) if parts[3] else np.nan)
        n_members.append(int(parts[4]))
    if not ts:
        raise EmptyInputError("no residual rows")
    return ResidualSeries(
        turbine_id=turbine_id,
        timestamps=np.array(ts, dtype=np.int64),
        actual=np.array(actual),
        predicted=np.array(predicted),
        residual=np.array(residual),
        n_members=np.array(n_members, dtype=np.int64),
    )
