"""Synthetic historical evaluation database.

Feature vectors are drawn uniformly inside the declared feature ranges
(with the cross-feature couplings), quantized to the file precision, and
labelled by running them through the index formulas and the weighted sum.
Labels are therefore exactly reproducible from the stored features when no
noise is added.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .credibility import INDEX_NAMES, IndexVector, compute_indices, credibility, load_matrix, principal_eigenvector
from .errors import ConfigError, MatrixError, WfcredError
from .features import FEATURE_SYMBOLS, FeatureVector
from .reference import REFERENCE_WEIGHTS

log = logging.getLogger(__name__)

SIG_DIGITS = 6
LABEL_COLUMN = "E"
PROVENANCE_COLUMN = "provenance"
DATASET_COLUMNS = FEATURE_SYMBOLS + INDEX_NAMES + (LABEL_COLUMN, PROVENANCE_COLUMN)


def quantize(v: float) -> float:
    """Round to the file precision (6 significant digits)."""
    return float(f"{v:.{SIG_DIGITS}g}")


def fmt(v: float) -> str:
    return f"{v:.{SIG_DIGITS}g}"


@dataclass(frozen=True)
class GeneratorConfig:
    """``weight_source`` is ``"paper"`` (the reference weights), a path to a
    judgment matrix file, or ``"perturbed:SCALE"`` for weights that drift
    log-normally away from the reference weights over the stream."""

    count: int = 2000
    seed: int = 42
    weight_source: str = "paper"
    label_noise_sd: float = 0.0
    coupling: bool = True

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("count must be >= 1")
        if self.label_noise_sd < 0:
            raise ConfigError("label_noise_sd must be >= 0")


@dataclass
class EvaluationRecord:
    features: FeatureVector
    indices: IndexVector
    credibility: float
    weights: np.ndarray | None = None
    provenance: str = "generated"


@dataclass
class GenerationStats:
    clamped: int = 0
    weights_cr: float | None = None
    notes: list = field(default_factory=list)


def sample_feature_vector(rng: np.random.Generator, coupling: bool = True) -> FeatureVector:
    """Draw one feature vector; integer-valued counts are whole numbers."""
    u = rng.uniform
    i = lambda lo, hi: float(rng.integers(lo, hi + 1))  # noqa: E731

    p_match = u(0, 1)
    p_integrity = u(0, 1)
    t_hat = u(30, 150)
    t_bar = u(0.9 * t_hat, 1.1 * t_hat) if coupling else u(30, 150)
    t_bar = min(max(t_bar, 30.0), 150.0)
    v_t = u(0, 3)
    n_active = i(0, 100)
    n_logic = i(0, 100)
    n_history = i(0, 200)
    p_hist_cons = u(0, 1)
    n_stimulate = i(0, 10)
    n_para = i(0, 100)
    if coupling:
        n_ex_para = i(0, int(min(20, n_para)))
        n_model = i(0, int(n_active))
        n_o = u(0, n_active)
    else:
        n_ex_para = i(0, 20)
        n_model = i(0, 100)
        n_o = u(0, 100)
    p_f = u(0, 1)
    p_s = u(0, 1)

    values = dict(
        p_match=p_match,
        p_integrity=p_integrity,
        t_hat=t_hat,
        t_bar=t_bar,
        v_t=v_t,
        n_o=n_o,
        n_active=n_active,
        n_logic=n_logic,
        n_history=n_history,
        p_hist_cons=p_hist_cons,
        n_stimulate=n_stimulate,
        n_para=n_para,
        n_ex_para=n_ex_para,
        p_f=p_f,
        p_s=p_s,
        n_model=n_model,
    )
    return FeatureVector(**{k: quantize(v) for k, v in values.items()})


def resolve_weights(source: str):
    """Return ``(base_weights, drift_scale, CR or None)`` for a weight source."""
    if source == "paper":
        return REFERENCE_WEIGHTS.copy(), 0.0, None
    if source.startswith("perturbed:"):
        try:
            scale = float(source.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad perturbation scale in {source!r}") from None
        if scale < 0:
            raise ConfigError("perturbation scale must be >= 0")
        return REFERENCE_WEIGHTS.copy(), scale, None
    try:
        wv = principal_eigenvector(load_matrix(source))
    except (MatrixError, WfcredError) as exc:
        raise ConfigError(f"cannot use weight matrix: {exc}") from None
    if wv.n != len(INDEX_NAMES):
        raise ConfigError(f"weight matrix must be {len(INDEX_NAMES)}x{len(INDEX_NAMES)}, got order {wv.n}")
    return wv.w, 0.0, wv.cr


def drifted_weights(base: np.ndarray, scale: float, seed: int, progress: float) -> np.ndarray:
    """Weights a fraction ``progress`` of the way along a fixed log-normal drift."""
    if scale == 0:
        return base
    direction = np.random.default_rng([seed, 0xD1F7]).standard_normal(len(base))
    w = base * np.exp(scale * progress * direction)
    return w / w.sum()


def generate_dataset(cfg: GeneratorConfig, stats: GenerationStats | None = None) -> list[EvaluationRecord]:
    """Generate ``cfg.count`` records in stream order.

    Record ``k`` draws from its own generator seeded by ``(seed, k)``, so
    the output depends only on ``cfg``.
    """
    stats = stats if stats is not None else GenerationStats()
    base, scale, cr = resolve_weights(cfg.weight_source)
    stats.weights_cr = cr
    records = []
    for k in range(cfg.count):
        rng = np.random.default_rng([cfg.seed, k])
        fv = sample_feature_vector(rng, cfg.coupling)
        idx = compute_indices(fv)
        w = drifted_weights(base, scale, cfg.seed, k / max(cfg.count - 1, 1))
        e = credibility(idx, w)
        if cfg.label_noise_sd > 0:
            e += rng.normal(0.0, cfg.label_noise_sd)
            if not 0.0 <= e <= 100.0:
                stats.clamped += 1
                e = min(max(e, 0.0), 100.0)
        records.append(EvaluationRecord(fv, idx, e, w, "generated"))
    if stats.clamped:
        log.info("%d of %d noisy labels clamped to [0, 100]", stats.clamped, cfg.count)
    return records


def records_to_arrays(records) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([r.features.as_array() for r in records])
    y = np.array([r.credibility for r in records], dtype=float)
    return X, y


def format_dataset(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DATASET_COLUMNS)
    for r in records:
        row = [fmt(v) for v in r.features.as_array()]
        row += [fmt(v) for v in r.indices.as_array()]
        row += [fmt(r.credibility), r.provenance]
        w.writerow(row)
    return buf.getvalue()


def write_dataset(records, path) -> None:
    Path(path).write_text(format_dataset(records), encoding="utf-8")


def parse_dataset(text: str) -> list[EvaluationRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise ConfigError("dataset file is empty") from None
    missing = [c for c in FEATURE_SYMBOLS + (LABEL_COLUMN,) if c not in header]
    if missing:
        raise ConfigError(f"dataset header lacks column(s): {', '.join(missing)}")
    col = {h: k for k, h in enumerate(header)}
    has_indices = all(n in col for n in INDEX_NAMES)
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            fv = FeatureVector.from_array([row[col[s]] for s in FEATURE_SYMBOLS])
            e = float(row[col[LABEL_COLUMN]])
            idx = IndexVector.from_array([row[col[n]] for n in INDEX_NAMES]) if has_indices else compute_indices(fv)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"dataset line {lineno}: {exc}") from None
        prov = row[col[PROVENANCE_COLUMN]] if PROVENANCE_COLUMN in col else "generated"
        records.append(EvaluationRecord(fv, idx, e, None, prov))
    return records


def read_dataset(path) -> list[EvaluationRecord]:
    path = Path(path)
    try:
        return parse_dataset(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
