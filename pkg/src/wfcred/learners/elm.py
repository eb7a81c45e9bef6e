"""Extreme learning machine: frozen random sigmoid features, least-squares readout."""

from __future__ import annotations

import numpy as np

from .base import Regressor, as_array, as_list, sigmoid
from .linalg import least_squares_solve


class ELMRegressor(Regressor):
    """Single hidden layer whose weights ``a`` and biases ``b`` are drawn once
    from ``U(-weight_scale, weight_scale)`` and never trained; the output
    weights solve the ridge problem ``min ||H beta - t||^2 + ridge ||beta||^2``.

    The output also carries an unpenalized intercept (the mean training
    target, with ``beta`` fitted to the centred targets), so a constant
    target is reproduced exactly whatever the ridge.
    """

    kind = "elm"

    def __init__(self, n_hidden: int = 100, ridge: float = 1e-6, weight_scale: float = 1.0, seed: int = 0):
        if n_hidden < 1:
            raise ValueError("n_hidden must be >= 1")
        self.n_hidden = n_hidden
        self.ridge = ridge
        self.weight_scale = weight_scale
        self.seed = seed
        self.a = self.b = self.beta = None
        self.intercept = 0.0

    def get_params(self):
        return dict(n_hidden=self.n_hidden, ridge=self.ridge, weight_scale=self.weight_scale, seed=self.seed)

    @property
    def is_fitted(self):
        return self.beta is not None

    def _init_hidden(self, n_inputs):
        rng = np.random.default_rng(self.seed)
        s = self.weight_scale
        self.a = rng.uniform(-s, s, size=(n_inputs, self.n_hidden))
        self.b = rng.uniform(-s, s, size=self.n_hidden)

    def hidden_output(self, X) -> np.ndarray:
        """The hidden layer output matrix H, one row per sample."""
        return sigmoid(np.atleast_2d(X) @ self.a + self.b)

    def fit(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if len(y) == 0:
            raise ValueError("ELM needs at least one training sample")
        if self.a is None or self.a.shape[0] != X.shape[1]:
            self._init_hidden(X.shape[1])
        self.intercept = float(np.mean(y))
        self.beta = least_squares_solve(self.hidden_output(X), y - self.intercept, self.ridge)
        return self

    def predict(self, X):
        return self.hidden_output(np.asarray(X, dtype=float)) @ self.beta + self.intercept

    def predict_one(self, x):
        return float(self.predict(x)[0])

    def get_state(self):
        return {"a": as_list(self.a), "b": as_list(self.b), "beta": as_list(self.beta), "intercept": self.intercept}

    def set_state(self, state):
        self.a = as_array(state["a"])
        self.b = as_array(state["b"])
        self.beta = as_array(state["beta"])
        self.intercept = float(state.get("intercept", 0.0))
