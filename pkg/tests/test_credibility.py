import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfcred import credibility as cred
from wfcred.credibility import (
    INDEX_NAMES,
    RANDOM_INDEX,
    IndexVector,
    JudgmentMatrix,
    compute_indices,
    compute_indices_array,
    consistency_check,
    consistency_ratio,
    credibility,
    format_matrix,
    load_matrix,
    parse_matrix,
    principal_eigenvector,
)
from wfcred.errors import MatrixError
from wfcred.features import FEATURE_HIGH, FEATURE_LOW, FeatureVector
from wfcred.reference import (
    DISCREPANCIES,
    MATCHING_INDICES,
    REFERENCE_CREDIBILITY,
    REFERENCE_FEATURES,
    REFERENCE_INDICES,
    REFERENCE_MATRIX,
    REFERENCE_WEIGHTS,
    fixture_path,
)

PERFECT = FeatureVector(
    p_match=1.0, p_integrity=1.0, t_hat=100.0, t_bar=100.0, v_t=0.0, n_o=0.0,
    n_active=20.0, n_logic=4.0, n_history=200.0, p_hist_cons=1.0, n_stimulate=0.0,
    n_para=10.0, n_ex_para=0.0, p_f=0.0, p_s=1.0, n_model=0.0,
)  # fmt: skip


def eig_oracle(a):
    """Principal eigenpair from a dense eigensolver."""
    vals, vecs = np.linalg.eig(np.asarray(a, dtype=float))
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    return float(vals[k].real), v / v.sum()


class TestIndices:
    def test_matching_tabulated_indices(self):
        got = compute_indices(REFERENCE_FEATURES).as_dict()
        tabulated = dict(zip(INDEX_NAMES, REFERENCE_INDICES))
        for name in MATCHING_INDICES:
            assert abs(got[name] - tabulated[name]) <= 5e-4, name

    def test_formula_values_where_table_differs(self):
        got = compute_indices(REFERENCE_FEATURES).as_dict()
        for name, (formula_value, tabulated) in DISCREPANCIES.items():
            assert abs(got[name] - formula_value) <= 5e-4, name
            assert abs(got[name] - tabulated) > 0.05, name

    def test_hand_evaluated_values(self):
        f = REFERENCE_FEATURES
        np.testing.assert_allclose(
            compute_indices(f).as_array(),
            [
                0.9039,
                1 - (143.71 - 142.85) / 142.85 * 3.5152,
                1 - 11 / 38 * 7 / 21,
                0.9039 * math.exp(-12 / 54),
                math.exp(-3 / 27),
                0.9632 * math.exp(-1 / 24),
                (1 - 0.0392) * math.exp(-9 / 729),
                0.9632 * 0.9039 * (1 - 0.0392),
            ],
            rtol=1e-12,
        )

    def test_perfect_features(self):
        x = compute_indices(PERFECT)
        for name in ("completeness", "accuracy", "independence", "robustness", "reliability", "reproducibility", "uncertainty"):
            assert getattr(x, name) == 1.0, name
        assert x.historical_use == pytest.approx(math.exp(-1 / 200))

    def test_accuracy_clamps_to_zero(self):
        f = replace(PERFECT, t_hat=30.0, t_bar=150.0, v_t=3.0)
        assert compute_indices(f).accuracy == 0.0

    def test_degenerate_denominators(self):
        empty = replace(PERFECT, n_active=0.0, n_logic=0.0, n_para=0.0, n_history=0.0, n_model=0.0, n_o=0.0)
        x = compute_indices(empty)
        assert x.independence == 1.0
        assert x.robustness == 1.0
        assert x.reliability == 1.0
        assert x.historical_use == 0.0
        assert x.uncertainty == 1.0
        models_no_nodes = replace(empty, n_model=2.0)
        assert compute_indices(models_no_nodes).robustness == 0.0

    def test_array_form(self):
        rows = np.vstack([REFERENCE_FEATURES.as_array(), PERFECT.as_array()])
        np.testing.assert_array_equal(compute_indices_array(rows)[1], compute_indices(PERFECT).as_array())

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=16, max_size=16))
    def test_indices_in_unit_interval(self, u):
        f = FeatureVector.from_array(FEATURE_LOW + np.array(u) * (FEATURE_HIGH - FEATURE_LOW))
        x = compute_indices(f).as_array()
        assert np.all((x >= 0) & (x <= 1))

    def test_index_vector_round_trip(self):
        x = IndexVector.from_array(REFERENCE_INDICES)
        np.testing.assert_array_equal(x.as_array(), REFERENCE_INDICES)
        with pytest.raises(ValueError):
            IndexVector.from_array([0.5] * 7)


class TestAHP:
    def test_reference_weights(self):
        wv = principal_eigenvector(JudgmentMatrix(REFERENCE_MATRIX))
        np.testing.assert_allclose(wv.w, REFERENCE_WEIGHTS, atol=2e-3)
        assert abs(wv.w.sum() - 1.0) <= 1e-9
        assert wv.cr < 0.1 and consistency_check(wv)

    def test_matches_dense_eigensolver(self):
        wv = principal_eigenvector(JudgmentMatrix(REFERENCE_MATRIX))
        lam, w = eig_oracle(REFERENCE_MATRIX)
        np.testing.assert_allclose(wv.w, w, atol=1e-9)
        assert wv.lambda_max == pytest.approx(lam, rel=1e-9)
        assert wv.ci == pytest.approx((lam - 8) / 7, rel=1e-9)
        assert wv.cr == pytest.approx((lam - 8) / 7 / 1.41, rel=1e-9)

    def test_reference_matrix_reciprocity_gaps_are_recorded(self):
        jm = JudgmentMatrix(REFERENCE_MATRIX)
        assert [(i, j) for i, j, _ in jm.reciprocity_violations] == [(2, 6), (3, 5)]
        with pytest.raises(MatrixError, match="not reciprocal"):
            JudgmentMatrix(REFERENCE_MATRIX, strict=True)

    def test_consistent_matrix(self):
        v = np.array([1.0, 2.0, 3.0, 4.0])
        wv = principal_eigenvector(JudgmentMatrix.consistent(v))
        np.testing.assert_allclose(wv.w, v / v.sum(), atol=1e-12)
        assert wv.lambda_max == pytest.approx(4.0)
        assert abs(wv.cr) < 1e-9

    def test_inconsistent_matrix_is_flagged(self):
        a = np.ones((8, 8))
        a[0, 2], a[2, 0] = 9.0, 1 / 9
        a[0, 1], a[1, 0] = 1 / 9, 9.0
        a[1, 2], a[2, 1] = 1 / 9, 9.0
        wv = principal_eigenvector(JudgmentMatrix(a))
        lam, _ = eig_oracle(a)
        assert wv.cr == pytest.approx((lam - 8) / 7 / 1.41, rel=1e-8)
        assert wv.cr >= 0.1
        assert not consistency_check(wv)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(3, 10), st.integers(0, 2**32 - 1))
    def test_random_reciprocal_matrices(self, n, seed):
        r = np.random.default_rng(seed)
        a = np.ones((n, n))
        iu = np.triu_indices(n, 1)
        a[iu] = np.exp(r.uniform(-np.log(9), np.log(9), len(iu[0])))
        a[(iu[1], iu[0])] = 1 / a[iu]
        wv = principal_eigenvector(JudgmentMatrix(a))
        lam, w = eig_oracle(a)
        np.testing.assert_allclose(wv.w, w, atol=1e-7)
        assert wv.lambda_max >= n - 1e-9
        assert wv.w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariance(self):
        a = REFERENCE_MATRIX
        np.testing.assert_allclose(principal_eigenvector(3.7 * a).w, principal_eigenvector(a).w, atol=1e-10)

    def test_rejects_bad_matrices(self):
        with pytest.raises(MatrixError):
            JudgmentMatrix(np.ones((2, 3)))
        with pytest.raises(MatrixError):
            JudgmentMatrix([[1, -1], [1, 1]])
        with pytest.raises(MatrixError):
            JudgmentMatrix([[2, 1], [1, 1]])

    def test_random_index_table(self):
        assert RANDOM_INDEX[8] == 1.41
        assert consistency_ratio(2.0, 2) == (0.0, 0.0)
        assert math.isnan(consistency_ratio(12.5, 12)[1])


class TestCredibility:
    def test_reference_score(self):
        w = principal_eigenvector(JudgmentMatrix(REFERENCE_MATRIX))
        assert abs(credibility(REFERENCE_INDICES, w) - REFERENCE_CREDIBILITY) <= 0.05
        assert abs(credibility(IndexVector.from_array(REFERENCE_INDICES), REFERENCE_WEIGHTS) - REFERENCE_CREDIBILITY) <= 0.05

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=8, max_size=8), st.lists(st.floats(0.01, 1), min_size=8, max_size=8))
    def test_bounded(self, x, w):
        w = np.array(w) / np.sum(w)
        assert -1e-9 <= credibility(x, w) <= 100 + 1e-9

    def test_linear_in_indices(self):
        x = np.linspace(0.1, 0.8, 8)
        assert credibility(x, REFERENCE_WEIGHTS) == pytest.approx(100 * float(x @ REFERENCE_WEIGHTS), rel=1e-14)


class TestMatrixFiles:
    def test_bundled_file(self):
        jm = load_matrix(fixture_path("reference_matrix.csv"))
        np.testing.assert_array_equal(jm.a, REFERENCE_MATRIX)

    def test_round_trip(self):
        jm = JudgmentMatrix(REFERENCE_MATRIX)
        np.testing.assert_array_equal(parse_matrix(format_matrix(jm)).a, jm.a)

    def test_labels_comments_and_whitespace(self):
        text = "# weights\n  a b\na 1 3\nb 0.3333333 1   # row b\n"
        np.testing.assert_allclose(parse_matrix(text).a, [[1, 3], [1 / 3, 1]], rtol=1e-6)

    @pytest.mark.parametrize("text", ["", "1,2\n3\n", "1,x\n2,1\n"])
    def test_malformed(self, text):
        with pytest.raises(MatrixError):
            parse_matrix(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MatrixError, match="nope"):
            load_matrix(tmp_path / "nope.csv")


def test_index_functions_are_module_level():
    # compute_indices resolves each formula through the module namespace
    assert all(callable(getattr(cred, name)) for name in INDEX_NAMES)
