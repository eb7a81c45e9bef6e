"""Small numerical kernels shared by the learners."""

from __future__ import annotations

import math
import warnings
from statistics import NormalDist

import numpy as np


class ConditionWarning(RuntimeWarning):
    """Least-squares system is rank deficient; minimum-norm solution used."""


def least_squares_solve(a, b, ridge: float = 0.0) -> np.ndarray:
    """Minimize ``||a x - b||^2 + ridge * ||x||^2``.

    The ridge term is folded in by stacking ``sqrt(ridge) * I`` under ``a``
    and handing the augmented system to an SVD-based solver, which avoids
    squaring the condition number the way the normal equations do. With
    ``ridge == 0`` a rank-deficient ``a`` yields the minimum-norm solution
    and a :class:`ConditionWarning`.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    n_cols = a.shape[1]
    if ridge > 0:
        a = np.vstack([a, math.sqrt(ridge) * np.eye(n_cols)])
        pad = np.zeros((n_cols,) + b.shape[1:])
        b = np.concatenate([b, pad])
    x, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    if rank < n_cols:
        cond = sv[0] / sv[-1] if sv[-1] > 0 else math.inf
        warnings.warn(f"rank {rank} < {n_cols} columns (condition {cond:.3g})", ConditionWarning, stacklevel=2)
    return x


def chi_square_quantile(dof: int, p: float) -> float:
    """Inverse CDF of the chi-square distribution.

    Exact for one and two degrees of freedom, Wilson-Hilferty cube
    approximation above that.
    """
    if dof < 1 or int(dof) != dof:
        raise ValueError(f"degrees of freedom must be a positive integer, got {dof}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    if dof == 1:
        z = NormalDist().inv_cdf(0.5 + 0.5 * p)
        return z * z
    if dof == 2:
        return -2.0 * math.log1p(-p)
    z = NormalDist().inv_cdf(p)
    h = 2.0 / (9.0 * dof)
    return dof * max(1.0 - h + z * math.sqrt(h), 0.0) ** 3
