"""Evaluation indices, AHP weighting and the scalar credibility score."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, MatrixError
from .features import FeatureVector

INDEX_NAMES = (
    "completeness",
    "accuracy",
    "independence",
    "uncertainty",
    "robustness",
    "historical_use",
    "reliability",
    "reproducibility",
)
N_INDICES = len(INDEX_NAMES)

# Saaty's random consistency indices, keyed by matrix order.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}
CR_THRESHOLD = 0.1


def _clip01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


@dataclass(frozen=True)
class IndexVector:
    completeness: float
    accuracy: float
    independence: float
    uncertainty: float
    robustness: float
    historical_use: float
    reliability: float
    reproducibility: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in INDEX_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "IndexVector":
        values = [float(v) for v in values]
        if len(values) != N_INDICES:
            raise ValueError(f"expected {N_INDICES} index values, got {len(values)}")
        return cls(*values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(INDEX_NAMES, self.as_array().tolist()))


# ---------------------------------------------------------------------------
# the eight indices; each maps raw features to [0, 1] before clipping


def completeness(f: FeatureVector) -> float:
    return f.p_integrity * f.p_match


def accuracy(f: FeatureVector) -> float:
    if f.t_hat <= 0:
        return 0.0
    return f.p_match * (1.0 - abs(f.t_bar - f.t_hat) / f.t_hat * f.v_t)


def independence(f: FeatureVector) -> float:
    nodes = f.n_logic + f.n_active + f.n_stimulate
    external_nodes = (f.n_logic + f.n_stimulate) / nodes if nodes else 0.0
    external_params = f.n_ex_para / f.n_para if f.n_para else 0.0
    return 1.0 - external_nodes * external_params


def _exp_neg_ratio(num: float, den: float) -> float:
    # exp(-num/den) with the den -> 0 limit
    if num == 0:
        return 1.0
    if den == 0:
        return 0.0
    return math.exp(-num / den)


def uncertainty(f: FeatureVector) -> float:
    return f.p_integrity * f.p_s * _exp_neg_ratio(f.n_stimulate + f.n_ex_para, f.n_active + f.n_logic + f.n_para)


def robustness(f: FeatureVector) -> float:
    # Negative exponent: a positive one would exceed 1 and miss the reference
    # value 0.8948 = exp(-3/27).
    return _exp_neg_ratio(f.n_model, f.n_active)


def historical_use(f: FeatureVector) -> float:
    return f.p_hist_cons * f.p_s * _exp_neg_ratio(1.0, f.n_history)


def reliability(f: FeatureVector) -> float:
    return (1.0 - f.p_f) * _exp_neg_ratio(f.n_model * f.n_o, f.n_active**2)


def reproducibility(f: FeatureVector) -> float:
    return f.p_hist_cons * f.p_integrity * f.p_s * (1.0 - f.p_f)


def compute_indices(f: FeatureVector) -> IndexVector:
    """Evaluate the eight index formulas on ``f`` and clip each into [0, 1].

    The feature values are used as given; range clamping of features is the
    caller's business (:func:`wfcred.features.extract_features` does it).
    """
    raw = (
        completeness(f),
        accuracy(f),
        independence(f),
        uncertainty(f),
        robustness(f),
        historical_use(f),
        reliability(f),
        reproducibility(f),
    )
    return IndexVector(*(_clip01(v) for v in raw))


def compute_indices_array(x: np.ndarray) -> np.ndarray:
    """Row-wise :func:`compute_indices` over an (n, 16) feature array."""
    x = np.atleast_2d(x)
    return np.array([compute_indices(FeatureVector.from_array(row)).as_array() for row in x])


# ---------------------------------------------------------------------------
# AHP


class JudgmentMatrix:
    """Positive pairwise comparison matrix.

    Reciprocity (``a_ij * a_ji == 1``) is checked to ``reciprocity_tol`` and
    violations are kept in :attr:`reciprocity_violations`; they only raise
    when ``strict`` is set, because tabulated matrices are often rounded or
    hand-edited.
    """

    def __init__(self, a, *, strict: bool = False, reciprocity_tol: float = 1e-2):
        a = np.array(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise MatrixError(f"judgment matrix must be square and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise MatrixError("judgment matrix entries must be finite and positive")
        if np.any(np.abs(np.diag(a) - 1.0) > 1e-9):
            raise MatrixError("judgment matrix diagonal must be 1")
        self.a = a
        self.a.setflags(write=False)
        dev = np.abs(a * a.T - 1.0)
        self.reciprocity_violations = [
            (int(i), int(j), float(a[i, j] * a[j, i]))
            for i, j in zip(*np.nonzero(dev > reciprocity_tol))
            if i < j
        ]
        if strict and self.reciprocity_violations:
            i, j, prod = self.reciprocity_violations[0]
            raise MatrixError(f"a[{i},{j}]*a[{j},{i}] = {prod:.4f}, not reciprocal")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def consistent(cls, v) -> "JudgmentMatrix":
        """The perfectly consistent matrix ``a_ij = v_i / v_j``."""
        v = np.asarray(v, dtype=float)
        return cls(np.outer(v, 1.0 / v))


@dataclass(frozen=True)
class WeightVector:
    w: np.ndarray
    lambda_max: float
    ci: float
    cr: float
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.w)

    def as_dict(self) -> dict[str, float]:
        names = INDEX_NAMES if self.n == N_INDICES else [f"w{i + 1}" for i in range(self.n)]
        return dict(zip(names, self.w.tolist()))


def consistency_ratio(lambda_max: float, n: int) -> tuple[float, float]:
    """Return ``(CI, CR)`` for an order-``n`` matrix."""
    if n <= 2:
        return 0.0, 0.0
    ci = (lambda_max - n) / (n - 1)
    ri = RANDOM_INDEX.get(n)
    # no tabulated random index beyond order 10
    return ci, (ci / ri if ri else math.nan)


def principal_eigenvector(m, rtol: float = 1e-10, max_iter: int = 1000) -> WeightVector:
    """AHP weights by power iteration on a positive matrix.

    Starts from the uniform vector and renormalizes to unit sum each step;
    stops when the largest component change relative to the largest weight
    drops below ``rtol``. ``m`` may also be any positive square array (the
    unit diagonal is not required then).
    """
    a = m.a if isinstance(m, JudgmentMatrix) else np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or np.any(a <= 0):
        raise MatrixError("power iteration needs a positive square matrix")
    n = a.shape[0]
    w = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = a @ w
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - w)) <= rtol * np.max(nxt):
            w = nxt
            break
        w = nxt
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    lam = float(w @ (a @ w) / (w @ w))
    ci, cr = consistency_ratio(lam, n)
    return WeightVector(w=w, lambda_max=lam, ci=ci, cr=cr, iterations=it)


def consistency_check(wv: WeightVector, threshold: float = CR_THRESHOLD) -> bool:
    """True when the judgments are acceptably consistent (CR below threshold)."""
    return wv.cr < threshold


def credibility(x, w) -> float:
    """Credibility score on [0, 100]: 100 times the weighted index sum."""
    xs = x.as_array() if isinstance(x, IndexVector) else np.asarray(x, dtype=float)
    ws = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    return float(100.0 * np.dot(ws, xs))


# ---------------------------------------------------------------------------
# matrix files

_SPLIT = re.compile(r"[,;\t ]+")


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def parse_matrix(text: str, **kwargs) -> JudgmentMatrix:
    """Read a delimiter-separated numeric grid.

    Blank lines and ``#`` comments are skipped. A non-numeric header row
    and a non-numeric leading label column are tolerated and ignored.
    """
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = [t for t in _SPLIT.split(line) if t]
        if toks and not _is_number(toks[0]):
            toks = toks[1:]
        if not rows and toks and not all(_is_number(t) for t in toks):
            continue
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise MatrixError(f"line {lineno}: non-numeric entry in {line!r}") from None
    if not rows:
        raise MatrixError("judgment matrix file has no numeric rows")
    if len({len(r) for r in rows}) != 1:
        raise MatrixError("judgment matrix rows have different lengths")
    return JudgmentMatrix(rows, **kwargs)


def load_matrix(path, **kwargs) -> JudgmentMatrix:
    path = Path(path)
    try:
        return parse_matrix(path.read_text(encoding="utf-8"), **kwargs)
    except MatrixError as exc:
        raise MatrixError(f"{path}: {exc}") from None
    except OSError as exc:
        raise MatrixError(f"{path}: {exc.strerror}") from None


def format_matrix(m: JudgmentMatrix) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in m.a) + "\n"
