"""Fast incremental Gaussian mixture network (precision-matrix form).

Each component keeps its mean over the joint (input, target) space, the
precision matrix ``A = C^-1`` and ``log det C``; both are maintained by
rank-one recurrences so no matrix is ever inverted during learning.
Regression is the posterior-weighted Gaussian conditional mean of the
target given the input.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .base import Regressor, as_array, as_list
from .linalg import chi_square_quantile

log = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)


class FIGMNRegressor(Regressor):
    """Incremental Gaussian mixture regressor.

    Parameters
    ----------
    delta : float
        Initial component width as a fraction of each dimension's range:
        a new component gets covariance ``diag((delta * range)^2)``.
    beta : float
        Novelty level. A point updates the components it falls inside at
        the ``1 - beta`` chi-square quantile; otherwise it seeds a new one.
    v_min, sp_min : float
        A component older than ``v_min`` steps that has gathered less than
        ``sp_min`` posterior mass is removed.
    data_range : array-like, optional
        Per-dimension range of the joint vector. Defaults to ones, which is
        right for normalized inputs and targets.
    """

    kind = "figmn"
    supports_incremental = True

    def __init__(self, delta: float = 1.0, beta: float = 0.1, v_min: float = 5, sp_min: float = 3, data_range=None):
        self.delta = delta
        self.beta = beta
        self.v_min = v_min
        self.sp_min = sp_min
        self.data_range = None if data_range is None else np.asarray(data_range, dtype=float)
        self.dim = None
        self.means: list[np.ndarray] = []
        self.precisions: list[np.ndarray] = []
        self.logdets: list[float] = []
        self.sps: list[float] = []
        self.ages: list[float] = []
        self.n_resets = 0
        self.n_created = 0

    def get_params(self):
        return dict(
            delta=self.delta,
            beta=self.beta,
            v_min=self.v_min,
            sp_min=self.sp_min,
            data_range=as_list(self.data_range),
        )

    @property
    def is_fitted(self):
        return bool(self.means)

    @property
    def n_components(self) -> int:
        return len(self.means)

    def priors(self) -> np.ndarray:
        sp = np.asarray(self.sps)
        return sp / sp.sum()

    def covariance(self, j: int) -> np.ndarray:
        """Covariance of component ``j`` (by inversion; diagnostics only)."""
        return np.linalg.inv(self.precisions[j])

    @property
    def novelty_threshold(self) -> float:
        return chi_square_quantile(self.dim, 1.0 - self.beta)

    def _sigma_ini_sq(self) -> np.ndarray:
        rng = self.data_range if self.data_range is not None else np.ones(self.dim)
        return (self.delta * rng) ** 2

    def _create(self, z):
        var = self._sigma_ini_sq()
        self.means.append(z.copy())
        self.precisions.append(np.diag(1.0 / var))
        self.logdets.append(float(np.sum(np.log(var))))
        self.sps.append(1.0)
        self.ages.append(1.0)
        self.n_created += 1

    def _reset(self, j):
        var = self._sigma_ini_sq()
        self.precisions[j] = np.diag(1.0 / var)
        self.logdets[j] = float(np.sum(np.log(var)))
        self.n_resets += 1
        log.warning("component %d lost positive definiteness; covariance reset", j)

    def _update(self, j, z, post):
        """Absorb ``z`` into component ``j`` with responsibility ``post``.

        With ``w = post / sp`` and ``e = z - mu`` the covariance follows the
        exact running recurrence ``C <- (1 - w) C + w (1 - w) e e^T``; its
        inverse and log-determinant follow from Sherman-Morrison and the
        matrix determinant lemma.
        """
        self.sps[j] += post
        w = post / self.sps[j]
        mu = self.means[j]
        e = z - mu
        self.means[j] = mu + w * e
        A = self.precisions[j]
        Ae = A @ e
        d2 = float(e @ Ae)
        k = 1.0 - w
        denom = 1.0 + w * d2
        A_new = (A - (w / denom) * np.outer(Ae, Ae)) / k
        A_new = 0.5 * (A_new + A_new.T)
        self.precisions[j] = A_new
        self.logdets[j] = self.logdets[j] + self.dim * math.log(k) + math.log(denom)
        try:
            np.linalg.cholesky(A_new)
        except np.linalg.LinAlgError:
            self._reset(j)

    def learn_one(self, x, y):
        z = np.append(np.asarray(x, dtype=float).ravel(), float(y))
        if self.dim is None:
            self.dim = len(z)
        elif len(z) != self.dim:
            raise ValueError(f"expected {self.dim - 1} inputs, got {len(z) - 1}")

        if not self.means:
            self._create(z)
            return

        for j in range(len(self.ages)):
            self.ages[j] += 1.0

        means = np.array(self.means)
        E = z - means
        d2 = np.einsum("ki,kij,kj->k", E, np.array(self.precisions), E)
        match = np.nonzero(d2 < self.novelty_threshold)[0]
        if len(match):
            sp = np.asarray(self.sps)
            logp = -0.5 * d2[match] - 0.5 * np.asarray(self.logdets)[match] + np.log(sp[match] / sp.sum())
            post = np.exp(logp - logp.max())
            post /= post.sum()
            for j, pj in zip(match, post):
                self._update(int(j), z, float(pj))
        else:
            self._create(z)

        keep = [j for j in range(len(self.means)) if not (self.ages[j] > self.v_min and self.sps[j] < self.sp_min)]
        if len(keep) < len(self.means):
            for name in ("means", "precisions", "logdets", "sps", "ages"):
                seq = getattr(self, name)
                setattr(self, name, [seq[j] for j in keep])

    def predict_one(self, x):
        if not self.means:
            raise RuntimeError("FIGMN has no components yet")
        x = np.asarray(x, dtype=float).ravel()
        ni = self.dim - 1
        logw = []
        cond = []
        sp = np.asarray(self.sps)
        for j, mu in enumerate(self.means):
            A = self.precisions[j]
            a_ii = A[:ni, :ni]
            a_it = A[:ni, ni]
            a_tt = A[ni, ni]
            dx = x - mu[:ni]
            cond.append(mu[ni] - (a_it @ dx) / a_tt)
            # input marginal: precision is the Schur complement, and
            # log det C_ii = log det C + log A_tt
            marg = a_ii - np.outer(a_it, a_it) / a_tt
            q = float(dx @ marg @ dx)
            logdet_ii = self.logdets[j] + math.log(a_tt)
            logw.append(math.log(sp[j]) - 0.5 * q - 0.5 * logdet_ii - 0.5 * ni * _LOG_2PI)
        logw = np.array(logw)
        w = np.exp(logw - logw.max())
        w /= w.sum()
        return float(w @ np.array(cond))

    def get_state(self):
        return {
            "dim": self.dim,
            "means": [m.tolist() for m in self.means],
            "precisions": [a.tolist() for a in self.precisions],
            "logdets": list(self.logdets),
            "sps": list(self.sps),
            "ages": list(self.ages),
            "n_resets": self.n_resets,
            "n_created": self.n_created,
        }

    def set_state(self, state):
        self.dim = state["dim"]
        self.means = [as_array(m) for m in state["means"]]
        self.precisions = [as_array(a) for a in state["precisions"]]
        self.logdets = [float(v) for v in state["logdets"]]
        self.sps = [float(v) for v in state["sps"]]
        self.ages = [float(v) for v in state["ages"]]
        self.n_resets = state.get("n_resets", 0)
        self.n_created = state.get("n_created", 0)
