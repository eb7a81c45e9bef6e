"""Evolving neo-fuzzy neuron.

The model is additive over inputs: ``y = sum_i sum_j mu_ij(x_i) * q_ij``.
Each input owns a sorted list of modal points, one membership function per
point, and one consequent weight per function. Memberships are either
complementary triangles (exactly two neighbours active, summing to one) or
Gaussians normalized to sum to one.

Structure adapts online. Observed input bounds stretch the outer modal
points, a function whose running error beats the global error level by
more than the global error variance is split (if the split would not be
finer than ``(x_max - x_min) / granularity``), and the longest-idle interior
function is dropped once it has been idle for ``max_age`` steps.
"""

from __future__ import annotations

import numpy as np

from .base import Regressor, as_array

MF_SHAPES = ("triangular", "gaussian")


class ENFNRegressor(Regressor):
    kind = "enfn"
    supports_incremental = True

    def __init__(
        self,
        mf: str = "triangular",
        beta: float = 0.1,
        granularity: float = 10.0,
        max_age: int = 150,
        lr_floor: float = 0.01,
        bounds=(0.0, 1.0),
    ):
        if mf not in MF_SHAPES:
            raise ValueError(f"mf must be one of {MF_SHAPES}, got {mf!r}")
        self.mf = mf
        self.beta = beta
        self.granularity = granularity
        self.max_age = max_age
        self.lr_floor = lr_floor
        self.bounds = (float(bounds[0]), float(bounds[1]))
        self.n_inputs = None
        self.t = 0
        self.err_mean = 0.0
        self.err_var = 0.0
        self.n_inserted = 0
        self.n_removed = 0

    def get_params(self):
        return dict(
            mf=self.mf,
            beta=self.beta,
            granularity=self.granularity,
            max_age=self.max_age,
            lr_floor=self.lr_floor,
            bounds=list(self.bounds),
        )

    @property
    def is_fitted(self):
        return self.n_inputs is not None

    def _init(self, n):
        lo, hi = self.bounds
        self.n_inputs = n
        self.x_min = np.full(n, lo)
        self.x_max = np.full(n, hi)
        self.modal = [np.array([lo, hi]) for _ in range(n)]
        self.q = [np.zeros(2) for _ in range(n)]
        self.activation = [np.zeros(2) for _ in range(n)]
        self.local_err = [np.zeros(2) for _ in range(n)]
        self.last_active = [np.zeros(2) for _ in range(n)]

    def n_mfs(self) -> list[int]:
        return [len(b) for b in self.modal]

    # -- memberships ------------------------------------------------------

    def _bracket(self, b, v):
        """Index k with b[k] <= v <= b[k+1], after clipping v into range."""
        v = min(max(v, b[0]), b[-1])
        k = int(np.searchsorted(b, v, side="right")) - 1
        return min(max(k, 0), len(b) - 2), v

    def memberships(self, i: int, v: float) -> np.ndarray:
        """Membership degrees of every function of input ``i`` at ``v``."""
        b = self.modal[i]
        if self.mf == "triangular":
            k, v = self._bracket(b, v)
            mu = np.zeros(len(b))
            left = (b[k + 1] - v) / (b[k + 1] - b[k])
            mu[k] = left
            mu[k + 1] = 1.0 - left
            return mu
        gaps = np.diff(b)
        nearest = np.minimum(np.r_[gaps[0], gaps], np.r_[gaps, gaps[-1]])
        spread = 0.5 * nearest
        mu = np.exp(-0.5 * ((v - b) / spread) ** 2)
        total = mu.sum()
        if total <= 0.0:
            mu = np.zeros(len(b))
            mu[int(np.argmin(np.abs(v - b)))] = 1.0
            return mu
        return mu / total

    def predict_one(self, x):
        if self.n_inputs is None:
            return 0.0
        x = np.asarray(x, dtype=float).ravel()
        return float(sum(self.memberships(i, x[i]) @ self.q[i] for i in range(self.n_inputs)))

    # -- learning ---------------------------------------------------------

    def learn_one(self, x, y):
        """Predict ``x``, then adapt; returns the prediction made before the update."""
        x = np.asarray(x, dtype=float).ravel()
        if self.n_inputs is None:
            self._init(len(x))
        self.t += 1
        for i, v in enumerate(x):
            if v < self.x_min[i]:
                self.x_min[i] = v
                self.modal[i][0] = v
            if v > self.x_max[i]:
                self.x_max[i] = v
                self.modal[i][-1] = v

        y_hat = self.predict_one(x)
        err = y_hat - float(y)
        abs_err = abs(err)
        b_ = self.beta
        self.err_mean = self.err_mean - b_ * (self.err_mean - abs_err)
        self.err_var = (1.0 - b_) * self.err_var + b_ * (self.err_mean - abs_err) ** 2
        threshold = self.err_mean + self.err_var

        n = self.n_inputs
        for i in range(n):
            mu = self.memberships(i, x[i])
            k, _ = self._bracket(self.modal[i], x[i])
            self.last_active[i][k : k + 2] = self.t
            self.activation[i] += mu
            rate = np.maximum(1.0 / np.maximum(self.activation[i], 1e-12), self.lr_floor)
            self.q[i] -= rate * err * mu / n

            best = int(np.argmax(mu))
            self.local_err[i][best] -= b_ * (self.local_err[i][best] - abs_err)
            if self.local_err[i][best] > threshold:
                self._maybe_split(i, best)
            self._maybe_prune(i)
        return y_hat

    def _maybe_split(self, i, best):
        b = self.modal[i]
        m = len(b)
        tau = (self.x_max[i] - self.x_min[i]) / self.granularity
        if 0 < best < m - 1:
            dist = (b[best + 1] - b[best - 1]) / 3.0
            new_points = [b[best - 1] + dist, b[best - 1] + 2.0 * dist]
            drop = [best]
        elif best == 0:
            dist = (b[1] - b[0]) / 2.0
            new_points = [b[0] + dist]
            drop = []
        else:
            # mirror of the first-point case: halfway back to the neighbour
            dist = (b[m - 1] - b[m - 2]) / 2.0
            new_points = [b[m - 1] - dist]
            drop = []
        if not dist > tau:
            return
        q_new = np.interp(new_points, b, self.q[i])
        keep = np.setdiff1d(np.arange(m), drop)
        order_b = np.concatenate([b[keep], new_points])
        order = np.argsort(order_b, kind="stable")
        k_new = len(new_points)
        self.modal[i] = order_b[order]
        self.q[i] = np.concatenate([self.q[i][keep], q_new])[order]
        self.activation[i] = np.concatenate([self.activation[i][keep], np.ones(k_new)])[order]
        self.local_err[i] = np.concatenate([self.local_err[i][keep], np.zeros(k_new)])[order]
        self.last_active[i] = np.concatenate([self.last_active[i][keep], np.full(k_new, float(self.t))])[order]
        self.n_inserted += 1

    def _maybe_prune(self, i):
        b = self.modal[i]
        m = len(b)
        if m <= 2:
            return
        # the outer functions carry the observed range and are never dropped
        idle = self.t - self.last_active[i][1:-1]
        j = int(np.argmax(idle)) + 1
        if idle[j - 1] <= self.max_age:
            return
        for name in ("modal", "q", "activation", "local_err", "last_active"):
            seq = getattr(self, name)
            seq[i] = np.delete(seq[i], j)
        self.n_removed += 1

    # -- checkpoint -------------------------------------------------------

    def get_state(self):
        if self.n_inputs is None:
            return {"n_inputs": None}
        return {
            "n_inputs": self.n_inputs,
            "t": self.t,
            "err_mean": self.err_mean,
            "err_var": self.err_var,
            "x_min": self.x_min.tolist(),
            "x_max": self.x_max.tolist(),
            "modal": [b.tolist() for b in self.modal],
            "q": [q.tolist() for q in self.q],
            "activation": [a.tolist() for a in self.activation],
            "local_err": [e.tolist() for e in self.local_err],
            "last_active": [a.tolist() for a in self.last_active],
            "n_inserted": self.n_inserted,
            "n_removed": self.n_removed,
        }

    def set_state(self, state):
        self.n_inputs = state["n_inputs"]
        if self.n_inputs is None:
            return
        self.t = state["t"]
        self.err_mean = state["err_mean"]
        self.err_var = state["err_var"]
        self.x_min = as_array(state["x_min"])
        self.x_max = as_array(state["x_max"])
        for name in ("modal", "q", "activation", "local_err", "last_active"):
            setattr(self, name, [as_array(v) for v in state[name]])
        self.n_inserted = state.get("n_inserted", 0)
        self.n_removed = state.get("n_removed", 0)
