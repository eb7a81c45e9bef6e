"""Reference case-study values (landing-process workflow).

These are the tabulated feature values, index scores, judgment matrix and
weights that the golden checks compare against. ``DISCREPANCIES`` lists the
indices where the index formulas and the tabulated scores disagree, with
the value each side gives.
"""

from importlib import resources

import numpy as np

from .features import FeatureVector

REFERENCE_FEATURES = FeatureVector(
    p_match=1.0,
    p_integrity=0.9039,
    t_hat=142.85,
    t_bar=143.71,
    v_t=3.5152,
    n_o=3.0,
    n_active=27.0,
    n_logic=6.0,
    n_history=24.0,
    p_hist_cons=0.9632,
    n_stimulate=5.0,
    n_para=21.0,
    n_ex_para=7.0,
    p_f=0.0392,
    p_s=1.0,
    n_model=3.0,
)

# Published scores, in index order.
REFERENCE_INDICES = np.array([0.9039, 0.8847, 0.9035, 0.8007, 0.8948, 0.9239, 0.9490, 0.9254])

# Indices whose tabulated score follows from the formulas (tolerance 5e-4).
MATCHING_INDICES = ("completeness", "independence", "robustness", "historical_use", "reliability")

# index -> (value the formula gives on REFERENCE_FEATURES, tabulated value)
DISCREPANCIES = {
    "accuracy": (0.9788, 0.8847),
    "uncertainty": (0.7237, 0.8007),
    "reproducibility": (0.8365, 0.9254),
}

REFERENCE_MATRIX = np.array(
    [
        [1, 1.277, 0.783, 1.63, 0.783, 1.277, 0.783, 0.613],
        [0.783, 1, 0.783, 1.63, 0.783, 1.277, 0.783, 0.613],
        [1.277, 1.277, 1, 1.277, 1.63, 1.63, 0.783, 0.783],
        [0.613, 0.613, 0.783, 1, 0.783, 1.63, 0.783, 0.613],
        [1.277, 1.277, 0.613, 1.277, 1, 1.63, 0.783, 0.783],
        [0.783, 0.783, 0.613, 0.783, 0.613, 1, 0.613, 0.481],
        [1.277, 1.277, 1.63, 1.277, 1.277, 1.63, 1, 0.783],
        [1.63, 1.63, 1.277, 1.63, 1.277, 2.08, 1.277, 1],
    ]
)

REFERENCE_WEIGHTS = np.array([0.1175, 0.1107, 0.1412, 0.0989, 0.1248, 0.0831, 0.1507, 0.1731])

REFERENCE_CREDIBILITY = 90.25


def fixture_path(name: str):
    """Path of a bundled fixture file (workflow, history log, matrix)."""
    return resources.files("wfcred") / "fixtures" / name
