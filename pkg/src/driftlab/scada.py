"""SCADA-style turbine series: CSV ingestion and synthetic generation.

A turbine series is a 10-minute-grid stream of (ambient temperature, wind
speed, turbulence intensity, active power). The synthetic generator exists so
the whole pipeline can be exercised and verified at desk scale with known,
injectable drifts; the injections it applies double as ground truth for the
evaluation stage.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DuplicateTimestampError,
    EmptyInputError,
    FormatError,
    RangeError,
    ValidationError,
)
from .timestamps import GRID_SECONDS, format_rfc3339, parse_rfc3339

CSV_HEADER = "timestamp,ambient_temp,wind_speed,turbulence,power"

#: Predictor channels, in the column order used for model matrices.
PREDICTOR_CHANNELS = ("ambient_temp", "wind_speed", "turbulence")
RESPONSE_CHANNEL = "power"

INJECTION_KINDS = ("sudden", "gradual", "recurring", "power_limitation")
INJECTION_TARGETS = ("power_offset", "power_scale", "sensor_offset")


@dataclass(frozen=True)
class ScadaRecord:
    """One 10-minute SCADA sample."""

    timestamp: int  # epoch seconds, UTC
    ambient_temp: float  # degC
    wind_speed: float  # m/s
    turbulence: float  # intensity in [0, 1]
    power: float  # kW


@dataclass
class TurbineSeries:
    """Column-oriented, time-ordered series of SCADA records for one turbine.

    Invariants (checked by :meth:`validate`): timestamps strictly increasing
    and grid-aligned spacing, wind_speed >= 0, turbulence in [0, 1],
    power >= 0, and all arrays the same length (non-empty).
    """

    turbine_id: str
    timestamps: np.ndarray  # int64 epoch seconds
    ambient_temp: np.ndarray
    wind_speed: np.ndarray
    turbulence: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        for name in ("ambient_temp", "wind_speed", "turbulence", "power"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        self.validate()

    def validate(self) -> None:
        n = len(self.timestamps)
        if n == 0:
            raise EmptyInputError("turbine series must be non-empty")
        for name in ("ambient_temp", "wind_speed", "turbulence", "power"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"column {name} length mismatch")
        diffs = np.diff(self.timestamps)
        if np.any(diffs == 0):
            raise DuplicateTimestampError(
                f"duplicate timestamp in series {self.turbine_id!r}"
            )
        if np.any(diffs < 0):
            raise ValidationError("timestamps not strictly increasing")
        if np.any(diffs % GRID_SECONDS != 0):
            raise ValidationError("timestamp spacing off the 600 s grid")
        if np.any(self.wind_speed < 0):
            raise ValidationError("wind_speed must be >= 0")
        if np.any((self.turbulence < 0) | (self.turbulence > 1)):
            raise ValidationError("turbulence must lie in [0, 1]")
        if np.any(self.power < 0):
            raise ValidationError("power must be >= 0")

    def __len__(self) -> int:
        return len(self.timestamps)

    def record(self, i: int) -> ScadaRecord:
        return ScadaRecord(
            timestamp=int(self.timestamps[i]),
            ambient_temp=float(self.ambient_temp[i]),
            wind_speed=float(self.wind_speed[i]),
            turbulence=float(self.turbulence[i]),
            power=float(self.power[i]),
        )

    def records(self) -> Iterator[ScadaRecord]:
        return (self.record(i) for i in range(len(self)))

    def predictor_matrix(
        self, channels: Sequence[str] = PREDICTOR_CHANNELS
    ) -> np.ndarray:
        """n x d matrix of the requested predictor channels."""
        cols = []
        for name in channels:
            if name not in PREDICTOR_CHANNELS:
                raise ValidationError(f"unknown predictor channel {name!r}")
            cols.append(getattr(self, name))
        return np.column_stack(cols)

    @classmethod
    def from_records(cls, turbine_id: str, records: Iterable[ScadaRecord]) -> "TurbineSeries":
        recs = list(records)
        if not recs:
            raise EmptyInputError("no records")
        return cls(
            turbine_id=turbine_id,
            timestamps=np.array([r.timestamp for r in recs], dtype=np.int64),
            ambient_temp=np.array([r.ambient_temp for r in recs]),
            wind_speed=np.array([r.wind_speed for r in recs]),
            turbulence=np.array([r.turbulence for r in recs]),
            power=np.array([r.power for r in recs]),
        )


@dataclass(frozen=True)
class DriftInjection:
    """A synthetic drift applied to a generated series.

    kind controls the time profile: `sudden` is a step over [start, end],
    `gradual` ramps linearly from 0 to `amplitude` across the window,
    `recurring` is a square wave (on for the first half of each `period`),
    and `power_limitation` clamps power at `amplitude` kW inside the window.

    target selects the affected channel for the first three kinds:
    `power_offset` adds to power, `power_scale` multiplies power by
    (1 + profile), `sensor_offset` adds to the sensor named by `channel`.
    """

    kind: str
    start: int  # epoch seconds
    end: int
    amplitude: float
    target: str = "power_offset"
    channel: str | None = None  # for sensor_offset
    period: float | None = None  # seconds, recurring only

    def __post_init__(self):
        if self.kind not in INJECTION_KINDS:
            raise ValidationError(f"unknown injection kind {self.kind!r}")
        if self.target not in INJECTION_TARGETS:
            raise ValidationError(f"unknown injection target {self.target!r}")
        if self.start >= self.end:
            raise ValidationError("injection start must precede end", field="end")
        if not math.isfinite(self.amplitude):
            raise ValidationError("injection amplitude must be finite")
        if self.kind == "recurring":
            if self.period is None or self.period <= 0:
                raise ValidationError("recurring injection requires period > 0")
        if self.target == "sensor_offset":
            if self.channel not in PREDICTOR_CHANNELS:
                raise ValidationError(
                    f"sensor_offset requires channel in {PREDICTOR_CHANNELS}"
                )

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "target": self.target,
            "start": format_rfc3339(self.start),
            "end": format_rfc3339(self.end),
            "amplitude": self.amplitude,
        }
        if self.channel is not None:
            doc["channel"] = self.channel
        if self.period is not None:
            doc["period"] = self.period
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "DriftInjection":
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad injection record: {line!r}") from exc
        return cls(
            kind=doc["kind"],
            target=doc.get("target", "power_offset"),
            start=parse_rfc3339(doc["start"]),
            end=parse_rfc3339(doc["end"]),
            amplitude=float(doc["amplitude"]),
            channel=doc.get("channel"),
            period=doc.get("period"),
        )


def write_injections(injections: Sequence[DriftInjection], stream: IO[str]) -> None:
    """Write injections as line-delimited JSON (one per line)."""
    for inj in injections:
        stream.write(inj.to_json() + "\n")


def read_injections(stream: IO[str]) -> list[DriftInjection]:
    return [DriftInjection.from_json(line) for line in stream if line.strip()]


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic turbine and weather parameters.

    The power curve is the standard piecewise form: zero below cut-in and
    above cut-out, a cubic ramp between cut-in and rated speed, flat at
    rated power up to cut-out. Weather: seasonal sinusoidal temperature,
    i.i.d. Weibull wind speed, Beta(2, 10) turbulence intensity.
    """

    rated_power: float = 2000.0  # kW
    cut_in: float = 3.0  # m/s
    rated_speed: float = 12.0
    cut_out: float = 25.0
    noise_sd: float = 40.0  # kW, additive; also scales the turbulence term
    seed: int = 0
    n_records: int = 52560  # one year of 10-minute data
    start: int = 1451606400  # 2016-01-01T00:00:00Z
    temp_mean: float = 12.0  # degC
    temp_amplitude: float = 8.0
    wind_shape: float = 2.0  # Weibull k
    wind_scale: float = 8.0  # Weibull lambda, m/s

    def __post_init__(self):
        if not (0 < self.cut_in < self.rated_speed < self.cut_out):
            raise ValidationError("require 0 < cut_in < rated_speed < cut_out")
        if self.rated_power <= 0:
            raise ValidationError("rated_power must be > 0")
        if self.noise_sd < 0:
            raise ValidationError("noise_sd must be >= 0")
        if self.n_records < 1:
            raise ValidationError("n_records must be >= 1")
        if self.start % GRID_SECONDS != 0:
            raise ValidationError("start must sit on the 600 s grid")


def theoretical_power(wind_speed, config: GeneratorConfig):
    """Noise-free power curve value(s) in kW for the given wind speed(s).

    Vectorized over numpy arrays; scalar in, scalar out.
    """
    v = np.asarray(wind_speed, dtype=np.float64)
    if np.any(v < 0):
        raise ValidationError("wind_speed must be >= 0")
    ramp = (
        config.rated_power
        * (v**3 - config.cut_in**3)
        / (config.rated_speed**3 - config.cut_in**3)
    )
    p = np.where(
        (v < config.cut_in) | (v > config.cut_out),
        0.0,
        np.where(v >= config.rated_speed, config.rated_power, ramp),
    )
    if np.isscalar(wind_speed) or np.ndim(wind_speed) == 0:
        return float(p)
    return p


def _profile(kind: str, ts: np.ndarray, inj: DriftInjection) -> np.ndarray:
    """Time profile in [0, 1] over the injection window (0 outside)."""
    mask = (ts >= inj.start) & (ts <= inj.end)
    prof = np.zeros(len(ts))
    if kind == "sudden":
        prof[mask] = 1.0
    elif kind == "gradual":
        span = inj.end - inj.start
        prof[mask] = (ts[mask] - inj.start) / span
    elif kind == "recurring":
        phase = (ts[mask] - inj.start) % inj.period
        prof[mask] = (phase < inj.period / 2).astype(float)
    return prof


def apply_injection(series: TurbineSeries, inj: DriftInjection) -> TurbineSeries:
    """Return a copy of `series` with one injection applied.

    Channel invariants are preserved: corrupted sensors are clipped back to
    their physical ranges and power is floored at zero.
    """
    ts = series.timestamps
    if inj.start < ts[0] or inj.end > ts[-1]:
        raise RangeError(
            f"injection [{format_rfc3339(inj.start)}, {format_rfc3339(inj.end)}] "
            "outside the series span"
        )
    out = TurbineSeries(
        turbine_id=series.turbine_id,
        timestamps=ts.copy(),
        ambient_temp=series.ambient_temp.copy(),
        wind_speed=series.wind_speed.copy(),
        turbulence=series.turbulence.copy(),
        power=series.power.copy(),
    )
    if inj.kind == "power_limitation":
        mask = (ts >= inj.start) & (ts <= inj.end)
        out.power[mask] = np.minimum(out.power[mask], inj.amplitude)
        out.power = np.maximum(out.power, 0.0)
        return out
    prof = _profile(inj.kind, ts, inj)
    if inj.target == "power_offset":
        out.power = np.maximum(out.power + prof * inj.amplitude, 0.0)
    elif inj.target == "power_scale":
        out.power = np.maximum(out.power * (1.0 + prof * inj.amplitude), 0.0)
    else:  # sensor_offset
        col = getattr(out, inj.channel)
        col = col + prof * inj.amplitude
        if inj.channel == "wind_speed":
            col = np.maximum(col, 0.0)
        elif inj.channel == "turbulence":
            col = np.clip(col, 0.0, 1.0)
        setattr(out, inj.channel, col)
    return out


def generate_series(
    config: GeneratorConfig,
    injections: Sequence[DriftInjection] = (),
) -> tuple[TurbineSeries, list[DriftInjection]]:
    """Generate a synthetic turbine series plus the applied ground truth.

    Deterministic for a fixed config (the RNG is owned per call). Power is
    `theoretical_power(v) * (1 + turbulence * eta * z1) + noise_sd * z2` with
    `eta = noise_sd / rated_power` and z1, z2 standard normal, floored at
    zero; injections are then applied in start-time order.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_records
    ts = config.start + GRID_SECONDS * np.arange(n, dtype=np.int64)

    year_s = 365.25 * 86400.0
    season = np.sin(2 * np.pi * (ts - ts[0]) / year_s)
    ambient_temp = (
        config.temp_mean + config.temp_amplitude * season + rng.normal(0.0, 2.0, n)
    )
    wind = config.wind_scale * rng.weibull(config.wind_shape, n)
    turbulence = rng.beta(2.0, 10.0, n)

    base = theoretical_power(wind, config)
    if config.noise_sd > 0:
        eta = config.noise_sd / config.rated_power
        mult = 1.0 + turbulence * eta * rng.standard_normal(n)
        power = base * mult + config.noise_sd * rng.standard_normal(n)
        power = np.maximum(power, 0.0)
    else:
        power = base

    series = TurbineSeries(
        turbine_id="synthetic",
        timestamps=ts,
        ambient_temp=ambient_temp,
        wind_speed=wind,
        turbulence=turbulence,
        power=power,
    )
    applied = sorted(injections, key=lambda inj: (inj.start, inj.end))
    for inj in applied:
        series = apply_injection(series, inj)
    return series, list(applied)


@dataclass
class ParseResult:
    """Outcome of a CSV parse: the series plus the count of dropped rows."""

    series: TurbineSeries
    dropped_rows: int


def parse_scada_csv(source: IO[bytes] | IO[str] | bytes | str, turbine_id: str) -> ParseResult:
    """Parse a SCADA CSV stream into a time-sorted :class:`TurbineSeries`.

    Rows with unparseable or non-finite numerics, bad timestamps, or values
    violating the channel invariants are dropped and counted. Duplicate
    timestamps among the surviving rows are an error.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise FormatError(f"expected header {CSV_HEADER!r}")

    rows: list[tuple[int, float, float, float, float]] = []
    dropped = 0
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            dropped += 1
            continue
        try:
            t = parse_rfc3339(parts[0])
            vals = [float(p) for p in parts[1:]]
        except (FormatError, ValueError):
            dropped += 1
            continue
        temp, wind, turb, power = vals
        if not all(math.isfinite(v) for v in vals):
            dropped += 1
            continue
        if wind < 0 or not (0 <= turb <= 1) or power < 0:
            dropped += 1
            continue
        rows.append((t, temp, wind, turb, power))

    if not rows:
        raise EmptyInputError("no valid data rows")
    rows.sort(key=lambda r: r[0])
    arr = np.array(rows, dtype=np.float64)
    ts = arr[:, 0].astype(np.int64)
    if np.any(np.diff(ts) == 0):
        raise DuplicateTimestampError("duplicate timestamps in CSV")
    series = TurbineSeries(
        turbine_id=turbine_id,
        timestamps=ts,
        ambient_temp=arr[:, 1],
        wind_speed=arr[:, 2],
        turbulence=arr[:, 3],
        power=arr[:, 4],
    )
    return ParseResult(series=series, dropped_rows=dropped)


def write_scada_csv(series: TurbineSeries, stream: IO[str]) -> None:
    """Serialize a series to CSV; numerics via repr so parsing round-trips."""
    stream.write(CSV_HEADER + "\n")
    for i in range(len(series)):
        stream.write(
            f"{format_rfc3339(int(series.timestamps[i]))},"
            f"{float(series.ambient_temp[i])!r},{float(series.wind_speed[i])!r},"
            f"{float(series.turbulence[i])!r},{float(series.power[i])!r}\n"
        )


def scada_csv_text(series: TurbineSeries) -> str:
    buf = io.StringIO()
    write_scada_csv(series, buf)
    return buf.getvalue()
