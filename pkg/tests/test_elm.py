import io

import numpy as np
import pytest

from driftlab.elm import (
    ELMParams,
    load_model,
    predict_elm,
    save_model,
    train_elm,
    validation_rmse,
)
from driftlab.errors import EmptyInputError, InsufficientDataError, ShapeMismatchError


def oracle_features(model, X):
    """Independent hidden-feature reconstruction (numpy only, no driftlab paths)."""
    Xs = (np.asarray(X) - model.scaler_mean) / model.scaler_sd
    Z = Xs @ model.input_weights.T + model.biases
    if model.params.activation == "sigmoid":
        H = 1.0 / (1.0 + np.exp(-Z))
    else:
        H = np.tanh(Z)
    return np.column_stack([H, np.ones(len(H))])


def oracle_ridge_beta(model, X, y):
    """Closed-form (H'H + lambda I)^-1 H' y_centered via plain dense solve."""
    H = oracle_features(model, X)
    lam = model.params.ridge_lambda
    A = H.T @ H + lam * np.eye(H.shape[1])
    return np.linalg.solve(A, H.T @ (np.asarray(y) - np.mean(y)))


def make_data(seed, n=500, d=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, 2.0, size=(n, d))
    y = np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2 - X[:, 2] + rng.normal(0, 0.1, n)
    return X, y


class TestTraining:
    def test_beta_matches_closed_form_oracle(self):
        X, y = make_data(0)
        params = ELMParams(hidden_width=60, ridge_lambda=1e-3, input_dim=3, seed=7)
        model = train_elm(X, y, params)
        beta = oracle_ridge_beta(model, X, y)
        rel = np.linalg.norm(model.output_weights - beta) / np.linalg.norm(beta)
        assert rel <= 1e-8

    def test_sine_regression_validation_rmse(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-np.pi, np.pi, 1000)
        y = np.sin(x)
        X = x[:, None]
        cut = 800
        params = ELMParams(hidden_width=50, ridge_lambda=1e-3, input_dim=1, seed=2)
        model = train_elm(X[:cut], y[:cut], params)
        assert validation_rmse(model, X[cut:], y[cut:]) < 0.05

    def test_constant_response_reproduced(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(200, 3))
        y = np.full(200, 37.25)
        model = train_elm(X, y, ELMParams(hidden_width=30, input_dim=3, seed=1))
        assert np.all(np.abs(predict_elm(model, X) - 37.25) < 1e-6)

    def test_interpolation_regime(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        params = ELMParams(hidden_width=60, ridge_lambda=0.0, input_dim=2, seed=3)
        model = train_elm(X, y, params)
        err = predict_elm(model, X) - y
        assert np.sqrt(np.mean(err**2)) <= 1e-6 * np.std(y)

    def test_determinism(self):
        X, y = make_data(2)
        params = ELMParams(hidden_width=40, input_dim=3, seed=11)
        a = train_elm(X, y, params)
        b = train_elm(X, y, params)
        assert np.array_equal(a.output_weights, b.output_weights)
        assert np.array_equal(a.input_weights, b.input_weights)

    def test_ridge_norm_monotone_in_lambda(self):
        X, y = make_data(3, n=300)
        norms = []
        for lam in (1e-6, 1e-4, 1e-2, 1.0, 100.0):
            params = ELMParams(hidden_width=50, ridge_lambda=lam, input_dim=3, seed=4)
            model = train_elm(X, y, params)
            norms.append(np.linalg.norm(model.output_weights))
        assert all(a >= b - 1e-9 for a, b in zip(norms, norms[1:]))

    def test_scaling_robustness(self):
        X, y = make_data(4, n=400)
        params = ELMParams(hidden_width=50, input_dim=3, seed=5)
        base = predict_elm(train_elm(X, y, params), X)
        X_scaled = X.copy()
        X_scaled[:, 1] *= 1000.0
        scaled = predict_elm(train_elm(X_scaled, y, params), X_scaled)
        rel = np.abs(scaled - base) / (np.abs(base) + 1e-12)
        assert rel.max() < 1e-6

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            train_elm(np.zeros((1, 3)), np.zeros(1), ELMParams(input_dim=3))

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            train_elm(np.zeros((10, 2)), np.zeros(10), ELMParams(input_dim=3))

    def test_nonfinite_rejected(self):
        X = np.zeros((10, 3))
        X[0, 0] = np.nan
        with pytest.raises(ShapeMismatchError):
            train_elm(X, np.zeros(10), ELMParams(input_dim=3))


class TestPrediction:
    def test_empty_matrix(self):
        X, y = make_data(7, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        assert predict_elm(model, np.zeros((0, 3))).shape == (0,)

    def test_row_permutation_equivariance(self):
        X, y = make_data(8, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        perm = np.random.default_rng(0).permutation(100)
        assert np.array_equal(predict_elm(model, X[perm]), predict_elm(model, X)[perm])

    def test_shape_error(self):
        X, y = make_data(9, n=50)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        with pytest.raises(ShapeMismatchError):
            predict_elm(model, np.zeros((5, 2)))


class TestValidationRmse:
    def test_exact_predictions_give_zero(self):
        X, y = make_data(10, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        preds = predict_elm(model, X)
        assert validation_rmse(model, X, preds) == 0.0

    def test_single_point(self):
        X, y = make_data(11, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        x0 = X[:1]
        target = predict_elm(model, x0) + 3.0
        assert validation_rmse(model, x0, target) == pytest.approx(3.0)

    def test_two_point_hand_value(self):
        X, y = make_data(12, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        x = X[:2]
        target = predict_elm(model, x) + np.array([3.0, 4.0])
        assert validation_rmse(model, x, target) == pytest.approx(np.sqrt(12.5))

    def test_empty_set(self):
        X, y = make_data(13, n=100)
        model = train_elm(X, y, ELMParams(hidden_width=20, input_dim=3, seed=0))
        with pytest.raises(EmptyInputError):
            validation_rmse(model, np.zeros((0, 3)), np.zeros(0))


class TestSerialization:
    def test_round_trip_bit_exact_predictions(self):
        X, y = make_data(14, n=300)
        model = train_elm(X, y, ELMParams(hidden_width=40, input_dim=3, seed=21))
        buf = io.BytesIO()
        save_model(model, buf)
        buf.seek(0)
        loaded = load_model(buf)
        assert np.array_equal(predict_elm(loaded, X), predict_elm(model, X))
        assert loaded.params == model.params
