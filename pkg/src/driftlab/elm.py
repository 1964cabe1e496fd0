"""Extreme learning machine regression.

Single hidden layer with randomly assigned, untrained weights; only the
output weights are fitted, by ridge regression on the hidden features. A
constant intercept feature is appended to the hidden layer and targets are
centered before the solve, so constant responses are represented exactly and
the ridge path keeps the usual norm-shrinkage behaviour.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConfigError, EmptyInputError, InsufficientDataError, ShapeMismatchError

ACTIVATIONS = ("sigmoid", "tanh")

_MAGIC = b"DLELM\x00"
_VERSION = 1


@dataclass(frozen=True)
class ELMParams:
    hidden_width: int = 100
    activation: str = "sigmoid"
    ridge_lambda: float = 1e-3
    input_dim: int = 3
    seed: int = 0
    #: multiplies the uniform [-1, 1] hidden weights, per input dimension
    #: (scalar applies to all). Larger values sharpen the random features
    #: along that dimension; smoother dimensions get smaller scales so the
    #: fit cannot absorb noise structure there.
    weight_scale: float | tuple[float, ...] = 1.0

    def __post_init__(self):
        if self.hidden_width < 1:
            raise ConfigError("hidden_width must be >= 1")
        if self.ridge_lambda < 0:
            raise ConfigError("ridge_lambda must be >= 0")
        if self.input_dim < 1:
            raise ConfigError("input_dim must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {ACTIVATIONS}")
        if isinstance(self.weight_scale, (int, float)):
            scales = (float(self.weight_scale),) * self.input_dim
        else:
            scales = tuple(float(s) for s in self.weight_scale)
        if len(scales) != self.input_dim:
            raise ConfigError("weight_scale length must match input_dim")
        if not all(s > 0 for s in scales):
            raise ConfigError("weight_scale must be > 0")
        object.__setattr__(self, "weight_scale", scales)

    def scale_vector(self) -> tuple[float, ...]:
        return self.weight_scale


@dataclass
class ELMModel:
    """Trained model: random hidden layer plus fitted output weights.

    `output_weights` has hidden_width + 1 entries; the last one multiplies
    the constant intercept feature. `target_mean` is added back at predict
    time (targets are centered for the ridge solve).
    """

    params: ELMParams
    input_weights: np.ndarray  # L x d
    biases: np.ndarray  # L
    output_weights: np.ndarray  # L + 1
    scaler_mean: np.ndarray  # d
    scaler_sd: np.ndarray  # d, all > 0
    target_mean: float


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    return np.tanh(z)


def _hidden_features(model: ELMModel, X: np.ndarray) -> np.ndarray:
    Xs = (X - model.scaler_mean) / model.scaler_sd
    H = _activate(model.params.activation, Xs @ model.input_weights.T + model.biases)
    return np.column_stack([H, np.ones(len(H))])


def _check_matrix(X: np.ndarray, d: int, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got {X.ndim}-D")
    if X.shape[1] != d:
        raise ShapeMismatchError(f"{name} has {X.shape[1]} columns, expected {d}")
    if X.size and not np.all(np.isfinite(X)):
        raise ShapeMismatchError(f"{name} contains non-finite entries")
    return X


def train_elm(X: np.ndarray, y: np.ndarray, params: ELMParams) -> ELMModel:
    """Fit output weights by ridge regression over random hidden features.

    W and b are drawn uniformly from [-1, 1] using params.seed; inputs are
    standardized per dimension first. The solve uses a Cholesky
    factorization of (H'H + lambda*I); a singular system with lambda = 0
    falls back to minimum-norm least squares on H directly.
    """
    X = _check_matrix(X, params.input_dim)
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y):
        raise ShapeMismatchError("X and y length mismatch")
    if len(X) < 2:
        raise InsufficientDataError("need at least 2 training rows")
    if not np.all(np.isfinite(y)):
        raise ShapeMismatchError("y contains non-finite entries")

    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0.0] = 1.0  # constant columns carry no signal; keep sds positive

    rng = np.random.default_rng(params.seed)
    L, d = params.hidden_width, params.input_dim
    scales = np.array(params.scale_vector())
    W = rng.uniform(-1.0, 1.0, size=(L, d)) * scales
    b = rng.uniform(-1.0, 1.0, size=L) * float(scales.max())

    y_mean = float(y.mean())
    yc = y - y_mean

    model = ELMModel(
        params=params,
        input_weights=W,
        biases=b,
        output_weights=np.zeros(L + 1),
        scaler_mean=mean,
        scaler_sd=sd,
        target_mean=y_mean,
    )
    H = _hidden_features(model, X)
    lam = params.ridge_lambda
    if lam > 0:
        A = H.T @ H
        A[np.diag_indices_from(A)] += lam
        try:
            beta = cho_solve(cho_factor(A), H.T @ yc)
        except LinAlgError:
            beta = np.linalg.lstsq(H, yc, rcond=None)[0]
    else:
        # lambda = 0: solve on H directly; minimum-norm when rank deficient
        beta = np.linalg.lstsq(H, yc, rcond=None)[0]
    model.output_weights = beta
    return model


def predict_elm(model: ELMModel, X: np.ndarray) -> np.ndarray:
    """Predict responses for an m x d matrix; pure function of (model, X)."""
    X = _check_matrix(X, model.params.input_dim)
    if len(X) == 0:
        return np.zeros(0)
    return _hidden_features(model, X) @ model.output_weights + model.target_mean


def validation_rmse(model: ELMModel, X_val: np.ndarray, y_val: np.ndarray) -> float:
    y_val = np.asarray(y_val, dtype=np.float64).ravel()
    if len(y_val) == 0:
        raise EmptyInputError("empty validation set")
    pred = predict_elm(model, X_val)
    if len(pred) != len(y_val):
        raise ShapeMismatchError("X_val and y_val length mismatch")
    return float(np.sqrt(np.mean((pred - y_val) ** 2)))


def save_model(model: ELMModel, stream: IO[bytes]) -> None:
    """Write the model in the versioned single-file binary format.

    Layout: magic, uint32 version, uint32 header length, JSON header, then
    the arrays scaler_mean, scaler_sd, W (row-major), b, beta and the target
    mean as little-endian float64.
    """
    p = model.params
    header = json.dumps(
        {
            "hidden_width": p.hidden_width,
            "activation": p.activation,
            "ridge_lambda": p.ridge_lambda,
            "input_dim": p.input_dim,
            "seed": p.seed,
            "weight_scale": list(p.scale_vector()),
        }
    ).encode("utf-8")
    stream.write(_MAGIC)
    stream.write(struct.pack("<II", _VERSION, len(header)))
    stream.write(header)
    for arr in (
        model.scaler_mean,
        model.scaler_sd,
        model.input_weights,
        model.biases,
        model.output_weights,
        np.array([model.target_mean]),
    ):
        stream.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _scale_from_doc(value) -> float | tuple[float, ...]:
    if isinstance(value, list):
        return tuple(float(v) for v in value)
    return float(value)


def load_model(stream: IO[bytes]) -> ELMModel:
    magic = stream.read(len(_MAGIC))
    if magic != _MAGIC:
        raise ConfigError("not an ELM model file")
    version, header_len = struct.unpack("<II", stream.read(8))
    if version != _VERSION:
        raise ConfigError(f"unsupported model file version {version}")
    doc = json.loads(stream.read(header_len).decode("utf-8"))
    params = ELMParams(
        hidden_width=doc["hidden_width"],
        activation=doc["activation"],
        ridge_lambda=doc["ridge_lambda"],
        input_dim=doc["input_dim"],
        seed=doc["seed"],
        weight_scale=_scale_from_doc(doc.get("weight_scale", 1.0)),
    )
    L, d = params.hidden_width, params.input_dim

    def read_array(count: int) -> np.ndarray:
        buf = stream.read(8 * count)
        if len(buf) != 8 * count:
            raise ConfigError("truncated model file")
        return np.frombuffer(buf, dtype="<f8").astype(np.float64)

    scaler_mean = read_array(d)
    scaler_sd = read_array(d)
    W = read_array(L * d).reshape(L, d)
    b = read_array(L)
    beta = read_array(L + 1)
    target_mean = float(read_array(1)[0])
    return ELMModel(
        params=params,
        input_weights=W,
        biases=b,
        output_weights=beta,
        scaler_mean=scaler_mean,
        scaler_sd=scaler_sd,
        target_mean=target_mean,
    )
