"""Single-hidden-layer back-propagation network with sigmoid units."""

from __future__ import annotations

import numpy as np

from .base import Regressor, as_array, as_list, sigmoid


class BPRegressor(Regressor):
    """Sigmoid MLP trained by gradient descent on half the squared error.

    For one sample the output-layer update is ``eta * (d - o) * o * (1 - o) * y``
    with ``y`` the hidden activations; batches average that over
    ``batch_size`` rows. Training stops once the training MSE reaches
    ``target_mse`` or after ``max_epochs`` passes.

    ``target_mse`` is in target units. The default ``1e-5`` on targets scaled
    to [0, 1] is an error variance of 0.1 on the 0-100 credibility scale.
    """

    kind = "bp"

    def __init__(
        self,
        n_hidden: int = 10,
        learning_rate: float = 0.1,
        target_mse: float = 1e-5,
        max_epochs: int = 10000,
        batch_size: int = 64,
        init_scale: float = 0.5,
        seed: int = 0,
    ):
        if n_hidden < 1:
            raise ValueError("n_hidden must be >= 1")
        self.n_hidden = n_hidden
        self.learning_rate = learning_rate
        self.target_mse = target_mse
        self.max_epochs = max_epochs
        self.batch_size = batch_size
        self.init_scale = init_scale
        self.seed = seed
        self.w1 = self.b1 = self.w2 = self.b2 = None
        self.report_ = {}

    def get_params(self):
        return dict(
            n_hidden=self.n_hidden,
            learning_rate=self.learning_rate,
            target_mse=self.target_mse,
            max_epochs=self.max_epochs,
            batch_size=self.batch_size,
            init_scale=self.init_scale,
            seed=self.seed,
        )

    @property
    def is_fitted(self):
        return self.w1 is not None

    def init_weights(self, n_inputs: int, rng=None):
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        s = self.init_scale
        self.w1 = rng.uniform(-s, s, size=(n_inputs, self.n_hidden))
        self.b1 = rng.uniform(-s, s, size=self.n_hidden)
        self.w2 = rng.uniform(-s, s, size=self.n_hidden)
        self.b2 = float(rng.uniform(-s, s))
        return rng

    def _forward(self, X):
        hidden = sigmoid(X @ self.w1 + self.b1)
        out = sigmoid(hidden @ self.w2 + self.b2)
        return hidden, out

    def loss(self, X, y) -> float:
        """Half mean squared error over the batch."""
        _, o = self._forward(np.atleast_2d(X))
        return 0.5 * float(np.mean((np.asarray(y) - o) ** 2))

    def gradients(self, X, y) -> dict:
        """Analytic gradient of :meth:`loss` with respect to every weight."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        hidden, o = self._forward(X)
        n = len(y)
        delta_out = (o - y) * o * (1.0 - o)
        delta_hidden = np.outer(delta_out, self.w2) * hidden * (1.0 - hidden)
        return {
            "w2": hidden.T @ delta_out / n,
            "b2": float(delta_out.sum() / n),
            "w1": X.T @ delta_hidden / n,
            "b1": delta_hidden.sum(axis=0) / n,
        }

    def fit(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        rng = self.init_weights(X.shape[1])
        n = len(y)
        bs = max(1, min(self.batch_size, n))
        eta = self.learning_rate
        mse = float(np.mean((y - self._forward(X)[1]) ** 2))
        epochs = 0
        while mse > self.target_mse and epochs < self.max_epochs:
            order = rng.permutation(n)
            for start in range(0, n, bs):
                idx = order[start : start + bs]
                xb, yb = X[idx], y[idx]
                hidden = sigmoid(xb @ self.w1 + self.b1)
                o = sigmoid(hidden @ self.w2 + self.b2)
                delta_out = (yb - o) * o * (1.0 - o)
                delta_hidden = np.outer(delta_out, self.w2) * hidden * (1.0 - hidden)
                m = len(idx)
                self.w2 += eta * (hidden.T @ delta_out) / m
                self.b2 += eta * float(delta_out.sum()) / m
                self.w1 += eta * (xb.T @ delta_hidden) / m
                self.b1 += eta * delta_hidden.sum(axis=0) / m
            epochs += 1
            mse = float(np.mean((y - self._forward(X)[1]) ** 2))
        self.report_ = {"epochs": epochs, "train_mse": mse, "converged": mse <= self.target_mse}
        return self

    def predict(self, X):
        return self._forward(np.atleast_2d(np.asarray(X, dtype=float)))[1]

    def predict_one(self, x):
        return float(self.predict(x)[0])

    def get_state(self):
        return {
            "w1": as_list(self.w1),
            "b1": as_list(self.b1),
            "w2": as_list(self.w2),
            "b2": self.b2,
            "report": self.report_,
        }

    def set_state(self, state):
        self.w1 = as_array(state["w1"])
        self.b1 = as_array(state["b1"])
        self.w2 = as_array(state["w2"])
        self.b2 = state["b2"]
        self.report_ = dict(state.get("report", {}))
