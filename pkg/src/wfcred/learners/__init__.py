"""Regressors mapping workflow features to a credibility score."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..features import normalize_features
from .base import Regressor
from .bp import BPRegressor
from .elm import ELMRegressor
from .enfn import ENFNRegressor
from .figmn import FIGMNRegressor
from .linalg import chi_square_quantile, least_squares_solve

LEARNER_NAMES = ("bp", "elm", "enfn-tri", "enfn-gauss", "figmn")
CHECKPOINT_FORMAT = "wfcred-model/1"

_CLASSES = {cls.kind: cls for cls in (BPRegressor, ELMRegressor, ENFNRegressor, FIGMNRegressor)}


def make_learner(name: str, seed: int = 0, **overrides) -> Regressor:
    """Build a learner by its command-line name."""
    if name == "bp":
        return BPRegressor(seed=seed, **overrides)
    if name == "elm":
        return ELMRegressor(seed=seed, **overrides)
    if name == "enfn-tri":
        return ENFNRegressor(mf="triangular", **overrides)
    if name == "enfn-gauss":
        return ENFNRegressor(mf="gaussian", **overrides)
    if name == "figmn":
        return FIGMNRegressor(**overrides)
    raise ValueError(f"unknown learner {name!r}; choose from {', '.join(LEARNER_NAMES)}")


class CredibilityModel:
    """Wraps a learner with the feature/target scaling.

    Inputs are raw 16-entry feature rows (min-max normalized here using the
    declared feature ranges); targets and predictions are 0-100 scores
    (divided by 100 for the learner).
    """

    def __init__(self, learner: Regressor, name: str | None = None):
        self.learner = learner
        self.name = name or learner.kind

    @property
    def supports_incremental(self) -> bool:
        return self.learner.supports_incremental

    def fit(self, features, scores):
        self.learner.fit(normalize_features(np.atleast_2d(features)), np.asarray(scores, dtype=float) / 100.0)
        return self

    def learn_one(self, features, score):
        self.learner.learn_one(normalize_features(features), float(score) / 100.0)

    def predict(self, features) -> np.ndarray:
        return 100.0 * self.learner.predict(normalize_features(np.atleast_2d(features)))

    def predict_one(self, features) -> float:
        return 100.0 * self.learner.predict_one(normalize_features(features))


def model_to_dict(model: Regressor, seed: int | None = None) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "kind": model.kind,
        "seed": seed if seed is not None else getattr(model, "seed", None),
        "params": model.get_params(),
        "state": model.get_state(),
    }


def model_from_dict(doc: dict) -> Regressor:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a model checkpoint (format {doc.get('format')!r})")
    cls = _CLASSES[doc["kind"]]
    model = cls(**doc["params"])
    model.set_state(doc["state"])
    return model


def save_model(model: Regressor, path, seed: int | None = None) -> None:
    """Write a JSON checkpoint; floats are stored with full round-trip precision."""
    Path(path).write_text(json.dumps(model_to_dict(model, seed), indent=1), encoding="utf-8")


def load_model(path) -> Regressor:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "BPRegressor",
    "CredibilityModel",
    "ELMRegressor",
    "ENFNRegressor",
    "FIGMNRegressor",
    "LEARNER_NAMES",
    "Regressor",
    "chi_square_quantile",
    "least_squares_solve",
    "load_model",
    "make_learner",
    "save_model",
]
