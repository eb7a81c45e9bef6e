"""Experiment harness: end-to-end evaluation, learner benchmarks, the
database-size switchover policy and the built-in golden checks.

Every number written by :func:`run_benchmark` can be recomputed from the
per-record error files: labels and predictions are stored with full
round-trip precision and the summary metrics are pure functions of them.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import credibility as cred
from .datagen import EvaluationRecord, GeneratorConfig, generate_dataset, read_dataset, records_to_arrays
from .errors import ConfigError
from .features import FeatureVector, HistoryLog, clamp_features, load_history, raw_features
from .learners import LEARNER_NAMES, CredibilityModel, make_learner
from .reference import (
    DISCREPANCIES,
    MATCHING_INDICES,
    REFERENCE_CREDIBILITY,
    REFERENCE_FEATURES,
    REFERENCE_INDICES,
    REFERENCE_MATRIX,
    REFERENCE_WEIGHTS,
)
from .workflow import ValidationReport, load_workflow, validate_graph

log = logging.getLogger(__name__)

WINDOW = 200
MAPE_MIN_LABEL = 1.0
UNFITTED_PREDICTION = 50.0
SPLIT_PRESETS = {
    "1900/100": (1900, 100),
    "1500/500": (1500, 500),
    "50/1950": (50, 1950),
    "100/1900": (100, 1900),
}


def _num(v: float) -> str:
    """Shortest text that parses back to exactly ``v``."""
    return "" if v is None else repr(float(v))


# ---------------------------------------------------------------------------
# metrics


def error_metrics(labels, predictions) -> dict:
    """Summary error statistics on the 0-100 scale.

    Percentage error skips labels below ``MAPE_MIN_LABEL`` (the ratio is
    unbounded there); how many were skipped is reported alongside.
    """
    labels = np.asarray(labels, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if labels.shape != predictions.shape:
        raise ValueError("labels and predictions differ in length")
    n = len(labels)
    if n == 0:
        nan = math.nan
        return dict(n=0, mae=nan, mape=nan, mape_excluded=0, frac_gt_2=nan, frac_gt_5=nan)
    abs_err = np.abs(predictions - labels)
    keep = labels >= MAPE_MIN_LABEL
    mape = float(np.mean(100.0 * abs_err[keep] / labels[keep])) if keep.any() else math.nan
    return dict(
        n=n,
        mae=float(np.mean(abs_err)),
        mape=mape,
        mape_excluded=int(n - keep.sum()),
        frac_gt_2=float(np.mean(abs_err > 2.0)),
        frac_gt_5=float(np.mean(abs_err > 5.0)),
    )


def window_means(abs_err, window: int = WINDOW) -> tuple[float, float]:
    """Mean absolute error over the first and the last ``window`` records.

    Both are NaN when the series is shorter than two windows, so the two
    never overlap.
    """
    abs_err = np.asarray(abs_err, dtype=float)
    if len(abs_err) < 2 * window:
        return math.nan, math.nan
    return float(np.mean(abs_err[:window])), float(np.mean(abs_err[-window:]))


def running_mean(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.cumsum(values) / np.arange(1, len(values) + 1)


# ---------------------------------------------------------------------------
# benchmark


@dataclass
class ExperimentConfig:
    """One benchmark run.

    ``split`` is ``(train, test)`` taken from the head of the data in order,
    or ``None`` for a single prequential stream over all records.
    """

    learners: tuple = LEARNER_NAMES
    split: tuple | None = (1900, 100)
    seed: int = 42
    out_dir: Path | None = None
    dataset: str | Path | None = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    overrides: dict = field(default_factory=dict)
    window: int = WINDOW
    plots: bool = True

    def __post_init__(self):
        unknown = [n for n in self.learners if n not in LEARNER_NAMES]
        if unknown:
            raise ConfigError(f"unknown learner(s): {', '.join(unknown)}; choose from {', '.join(LEARNER_NAMES)}")
        if self.split is not None:
            train, test = self.split
            if train < 1 or test < 1:
                raise ConfigError("split sizes must be positive")


def parse_split(text: str):
    """``"TRAIN/TEST"`` (or a preset name) to a tuple; ``"stream"`` to None."""
    text = text.strip().lower()
    if text == "stream":
        return None
    if text in SPLIT_PRESETS:
        return SPLIT_PRESETS[text]
    try:
        train, test = (int(p) for p in text.split("/"))
    except ValueError:
        raise ConfigError(f"split must be TRAIN/TEST or 'stream', got {text!r}") from None
    if train < 1 or test < 1:
        raise ConfigError("split sizes must be positive")
    return train, test


@dataclass
class LearnerRun:
    learner: str
    protocol: str
    status: str = "ok"
    note: str = ""
    index: np.ndarray | None = None
    labels: np.ndarray | None = None
    predictions: np.ndarray | None = None
    n_train: int = 0
    seconds: float = 0.0
    metrics: dict = field(default_factory=dict)
    warmup_mae: float = math.nan
    stabilized_mae: float = math.nan

    def finish(self, window: int):
        self.metrics = error_metrics(self.labels, self.predictions)
        self.warmup_mae, self.stabilized_mae = window_means(np.abs(self.predictions - self.labels), window)


@dataclass
class BenchmarkReport:
    config: ExperimentConfig
    runs: list
    n_records: int

    def by_learner(self) -> dict:
        return {r.learner: r for r in self.runs}

    def mae(self, learner: str) -> float:
        return self.by_learner()[learner].metrics.get("mae", math.nan)


def _predict_or_default(model: CredibilityModel, x) -> float:
    if not model.learner.is_fitted:
        return UNFITTED_PREDICTION
    return model.predict_one(x)


def prequential(model: CredibilityModel, X, y) -> np.ndarray:
    """Predict each record before learning it; returns the predictions.

    The prediction for record ``t`` is taken before its label is touched,
    so it depends on records ``0..t-1`` only.
    """
    preds = np.empty(len(y))
    for t in range(len(y)):
        preds[t] = _predict_or_default(model, X[t])
        model.learn_one(X[t], y[t])
    return preds


def _mean_baseline(X, y, split) -> LearnerRun:
    if split is None:
        # running mean of the labels seen so far
        preds = np.r_[UNFITTED_PREDICTION, running_mean(y)[:-1]] if len(y) else np.empty(0)
        return LearnerRun("mean", "prequential", index=np.arange(len(y)), labels=y, predictions=preds)
    train, test = split
    preds = np.full(test, float(np.mean(y[:train])))
    idx = np.arange(train, train + test)
    return LearnerRun("mean", "split", index=idx, labels=y[idx], predictions=preds, n_train=train)


def _run_learner(name: str, X, y, cfg: ExperimentConfig) -> LearnerRun:
    model = CredibilityModel(make_learner(name, seed=cfg.seed, **cfg.overrides.get(name, {})), name)
    online = model.supports_incremental
    if cfg.split is None:
        if not online:
            return LearnerRun(name, "prequential", status="skipped", note="offline learner needs a train/test split")
        preds = prequential(model, X, y)
        return LearnerRun(name, "prequential", index=np.arange(len(y)), labels=y, predictions=preds)
    train, test = cfg.split
    idx = np.arange(train, train + test)
    model.fit(X[:train], y[:train])
    if online:
        # keep learning through the test segment, scoring each record first
        preds = prequential(model, X[idx], y[idx])
        protocol = "split+prequential"
    else:
        preds = model.predict(X[idx])
        protocol = "split"
    run = LearnerRun(name, protocol, index=idx, labels=y[idx], predictions=preds, n_train=train)
    report = getattr(model.learner, "report_", None)
    if report:
        run.note = "epochs={epochs} train_mse={train_mse:.6g} converged={converged}".format(**report)
    return run


def load_experiment_data(cfg: ExperimentConfig) -> list[EvaluationRecord]:
    if cfg.dataset is not None:
        return read_dataset(cfg.dataset)
    return generate_dataset(cfg.generator)


def run_benchmark(cfg: ExperimentConfig, records=None) -> BenchmarkReport:
    """Run every configured learner on identical data in identical order.

    A learner that raises gets a ``failed`` row; the others still run.
    """
    records = records if records is not None else load_experiment_data(cfg)
    X, y = records_to_arrays(records)
    if cfg.split is not None and sum(cfg.split) > len(y):
        raise ConfigError(f"split {cfg.split[0]}/{cfg.split[1]} needs {sum(cfg.split)} records, dataset has {len(y)}")
    runs = [_mean_baseline(X, y, cfg.split)]
    for name in cfg.learners:
        t0 = time.perf_counter()
        try:
            run = _run_learner(name, X, y, cfg)
        except Exception as exc:  # isolate the failure to this learner's row
            log.exception("learner %s failed", name)
            run = LearnerRun(name, "split" if cfg.split else "prequential", status="failed", note=str(exc))
        run.seconds = time.perf_counter() - t0
        runs.append(run)
    for run in runs:
        if run.status == "ok":
            run.finish(cfg.window)
    report = BenchmarkReport(cfg, runs, len(y))
    if cfg.out_dir is not None:
        write_benchmark(report, cfg.out_dir, plots=cfg.plots)
    return report


METRICS_COLUMNS = (
    "learner",
    "status",
    "protocol",
    "n_train",
    "n_eval",
    "mae",
    "mape",
    "mape_excluded",
    "frac_err_gt_2",
    "frac_err_gt_5",
    "warmup_mae",
    "stabilized_mae",
    "note",
)


def format_metrics(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_COLUMNS)
    for r in report.runs:
        m = r.metrics
        if r.status != "ok":
            w.writerow([r.learner, r.status, r.protocol, r.n_train, 0, "", "", "", "", "", "", "", r.note])
            continue
        w.writerow(
            [
                r.learner,
                r.status,
                r.protocol,
                r.n_train,
                m["n"],
                _num(m["mae"]),
                _num(m["mape"]),
                m["mape_excluded"],
                _num(m["frac_gt_2"]),
                _num(m["frac_gt_5"]),
                _num(r.warmup_mae),
                _num(r.stabilized_mae),
                r.note,
            ]
        )
    return buf.getvalue()


def format_errors(run: LearnerRun) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("index", "label", "prediction", "abs_error", "running_mae"))
    abs_err = np.abs(run.predictions - run.labels)
    for i, lab, pred, ae, rm in zip(run.index, run.labels, run.predictions, abs_err, running_mean(abs_err)):
        w.writerow((int(i), _num(lab), _num(pred), _num(ae), _num(rm)))
    return buf.getvalue()


def read_errors(path) -> tuple[np.ndarray, np.ndarray]:
    """Labels and predictions back from an ``errors_<learner>.csv`` file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    labels = np.array([float(r["label"]) for r in rows])
    preds = np.array([float(r["prediction"]) for r in rows])
    return labels, preds


def read_metrics(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["learner"]: row for row in csv.DictReader(fh)}


def plot_errors(run: LearnerRun, path) -> None:
    """Absolute error per record plus its running mean, as a standalone SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    abs_err = np.abs(run.predictions - run.labels)
    with matplotlib.rc_context({"svg.hashsalt": "wfcred", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        ax.plot(run.index, abs_err, lw=0.6, color="0.6", label="|error|")
        ax.plot(run.index, running_mean(abs_err), lw=1.5, color="C0", label="running mean")
        ax.set_xlabel("record")
        ax.set_ylabel("absolute error (credibility points)")
        ax.set_title(f"{run.learner} ({run.protocol})")
        ax.legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def write_benchmark(report: BenchmarkReport, out_dir, plots: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(format_metrics(report), encoding="utf-8")
    for run in report.runs:
        if run.status != "ok":
            continue
        (out / f"errors_{run.learner}.csv").write_text(format_errors(run), encoding="utf-8")
        if plots and run.learner != "mean":
            plot_errors(run, out / f"plot_{run.learner}.svg")


# ---------------------------------------------------------------------------
# switchover between formula evaluation and the learned model


@dataclass
class SwitchoverPolicy:
    """Below ``threshold`` stored records, score by formula and grow the
    database; from there on, answer with the learned model."""

    threshold: int = 200

    def __post_init__(self):
        if self.threshold < 0:
            raise ConfigError("threshold must be >= 0")

    def mode(self, database_size: int) -> str:
        return "manual" if database_size < self.threshold else "empirical"


class SwitchoverEngine:
    """Holds the database and learners across a sequence of queries.

    Incremental learners take one step per manually scored record. Offline
    learners are trained on the whole database the first time the empirical
    path is taken and reused afterwards.
    """

    def __init__(self, policy: SwitchoverPolicy, learners=(), weights=None, database=None):
        self.policy = policy
        self.models = list(learners)
        self.weights = REFERENCE_WEIGHTS if weights is None else np.asarray(weights, dtype=float)
        self.database: list[EvaluationRecord] = list(database or [])
        self._offline_ready = False

    def manual_score(self, fv: FeatureVector) -> tuple[float, cred.IndexVector]:
        idx = cred.compute_indices(fv)
        return cred.credibility(idx, self.weights), idx

    def _empirical_model(self) -> CredibilityModel | None:
        for m in self.models:
            if m.supports_incremental and m.learner.is_fitted:
                return m
        offline = [m for m in self.models if not m.supports_incremental]
        if offline and self.database:
            if not self._offline_ready:
                X, y = records_to_arrays(self.database)
                for m in offline:
                    m.fit(X, y)
                self._offline_ready = True
            return offline[0]
        return None

    def query(self, fv: FeatureVector) -> tuple[float, str]:
        """Score one workflow; returns ``(credibility, path)``.

        ``path`` is ``"manual"``, ``"empirical"`` or ``"manual-fallback"``
        (empirical mode requested but no learner can predict yet).
        """
        mode = self.policy.mode(len(self.database))
        if mode == "empirical":
            model = self._empirical_model()
            if model is not None:
                return float(model.predict_one(fv.as_array())), "empirical"
            warnings.warn("no trained learner available; falling back to formula evaluation", RuntimeWarning, stacklevel=2)
            e, _ = self.manual_score(fv)
            return e, "manual-fallback"
        e, idx = self.manual_score(fv)
        self.database.append(EvaluationRecord(fv, idx, e, self.weights, "computed-from-workflow"))
        x = fv.as_array()
        for m in self.models:
            if m.supports_incremental:
                m.learn_one(x, e)
        return e, "manual"


def apply_switchover(policy: SwitchoverPolicy, fv: FeatureVector, database: list, learners=(), weights=None):
    """Single-query form of :class:`SwitchoverEngine`; mutates ``database``
    (and the learners) exactly as the engine would."""
    engine = SwitchoverEngine(policy, learners, weights)
    engine.database = database
    return engine.query(fv)


# ---------------------------------------------------------------------------
# end-to-end evaluation


@dataclass
class EvaluationResult:
    features: FeatureVector
    clamp_notes: list
    indices: cred.IndexVector
    weights: cred.WeightVector
    consistent: bool
    credibility: float
    validation: ValidationReport


def evaluate_workflow(workflow_path, history_path=None, matrix_path=None) -> EvaluationResult:
    """Features, indices, weights and credibility for one workflow.

    Without a judgment matrix the reference matrix is used.
    """
    g = load_workflow(workflow_path)
    h = load_history(history_path) if history_path else HistoryLog()
    fv, notes = clamp_features(raw_features(g, h))
    jm = cred.load_matrix(matrix_path) if matrix_path else cred.JudgmentMatrix(REFERENCE_MATRIX)
    wv = cred.principal_eigenvector(jm)
    idx = cred.compute_indices(fv)
    return EvaluationResult(
        features=fv,
        clamp_notes=notes,
        indices=idx,
        weights=wv,
        consistent=cred.consistency_check(wv),
        credibility=cred.credibility(idx, wv),
        validation=validate_graph(g),
    )


# ---------------------------------------------------------------------------
# golden checks


@dataclass(frozen=True)
class GoldenCheck:
    name: str
    expected: float
    actual: float
    tol: float
    kind: str = "golden"

    @property
    def passed(self) -> bool:
        return bool(abs(self.actual - self.expected) <= self.tol)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<32} expected {self.expected:.6g} +/- {self.tol:g}, got {self.actual:.6g}"


def golden_checks(weights=None) -> list[GoldenCheck]:
    """Re-derive the reference case study and compare with the tabulated
    numbers. ``weights`` overrides the AHP result (to exercise the check)."""
    checks = []
    idx = cred.compute_indices(REFERENCE_FEATURES).as_dict()
    ref = dict(zip(cred.INDEX_NAMES, REFERENCE_INDICES))
    for name in MATCHING_INDICES:
        checks.append(GoldenCheck(f"index {name}", float(ref[name]), idx[name], 5e-4))
    for name, (formula_value, _tabulated) in DISCREPANCIES.items():
        checks.append(GoldenCheck(f"index {name} (formula)", formula_value, idx[name], 5e-4, kind="discrepancy"))

    wv = cred.principal_eigenvector(cred.JudgmentMatrix(REFERENCE_MATRIX))
    w = wv.w if weights is None else np.asarray(weights, dtype=float)
    for name, expected, got in zip(cred.INDEX_NAMES, REFERENCE_WEIGHTS, w):
        checks.append(GoldenCheck(f"weight {name}", float(expected), float(got), 2e-3))
    checks.append(GoldenCheck("weight sum", 1.0, float(np.sum(w)), 1e-9))
    checks.append(GoldenCheck("consistency ratio < 0.1", 0.0, float(wv.cr), 0.1 - 1e-12))
    checks.append(GoldenCheck("credibility", REFERENCE_CREDIBILITY, cred.credibility(REFERENCE_INDICES, w), 0.05))
    return checks
