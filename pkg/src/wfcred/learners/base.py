"""Common regressor contract.

Learners work on min-max normalized inputs and targets on [0, 1] (the
credibility score divided by 100); :class:`wfcred.learners.CredibilityModel`
does the scaling for callers that hold raw features and 0-100 scores.
"""

from __future__ import annotations

import numpy as np


class Regressor:
    kind = "base"
    supports_incremental = False

    def fit(self, X, y):
        """Batch training; incremental learners consume the rows in order."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if not self.supports_incremental:
            raise NotImplementedError
        for xi, yi in zip(X, y):
            self.learn_one(xi, yi)
        return self

    def learn_one(self, x, y):
        raise NotImplementedError(f"{self.kind} does not learn incrementally")

    def predict_one(self, x) -> float:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.predict_one(x) for x in X])

    @property
    def is_fitted(self) -> bool:
        raise NotImplementedError

    # checkpoint support: plain JSON-able dicts
    def get_params(self) -> dict:
        raise NotImplementedError

    def get_state(self) -> dict:
        raise NotImplementedError

    def set_state(self, state: dict) -> None:
        raise NotImplementedError


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def as_list(a):
    return None if a is None else np.asarray(a).tolist()


def as_array(a):
    return None if a is None else np.asarray(a, dtype=float)
