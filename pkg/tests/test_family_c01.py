import numpy as np
import pytest

from ggmselect import DomainError, Graph, c01_family, partial_corr, pmax


def residual_corr(X, a, b, c):
    """Correlation of the residuals of X_a and X_b after regressing out X_c."""
    Z = np.column_stack([np.ones(X.shape[0]), X[:, c]])

    def resid(v):
        beta, *_ = np.linalg.lstsq(Z, v, rcond=None)
        return v - Z @ beta

    ra, rb = resid(X[:, a]), resid(X[:, b])
    return float(ra @ rb / np.sqrt((ra @ ra) * (rb @ rb)))


def test_partial_corr_formula_on_handmade_matrix():
    R = np.array([[1.0, 0.5, 0.3], [0.5, 1.0, 0.4], [0.3, 0.4, 1.0]])
    expected = (0.5 - 0.3 * 0.4) / np.sqrt((1 - 0.09) * (1 - 0.16))
    assert partial_corr(R, 0, 1, 2) == pytest.approx(expected, rel=1e-12)
    assert partial_corr(R, 0, 1, None) == 0.5


def test_partial_corr_matches_residual_oracle():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((300, 4))
    X[:, 1] += 0.7 * X[:, 0] + 0.4 * X[:, 3]
    X = X - X.mean(axis=0)
    R = np.corrcoef(X, rowvar=False)
    for a, b, c in [(0, 1, 3), (1, 2, 0), (0, 3, 2)]:
        assert partial_corr(R, a, b, c) == pytest.approx(
            residual_corr(X, a, b, c), abs=1e-10
        )


def test_partial_corr_validation():
    R = np.eye(3)
    with pytest.raises(DomainError):
        partial_corr(R, 1, 1, 2)
    with pytest.raises(DomainError):
        partial_corr(R, 0, 1, 1)
    with pytest.raises(DomainError):
        partial_corr(R, 0, 3, 1)
    R_bad = np.array([[1.0, 0.2, 1.0], [0.2, 1.0, 0.1], [1.0, 0.1, 1.0]])
    with pytest.raises(DomainError):
        partial_corr(R_bad, 0, 1, 2)  # |corr(a, c)| = 1


def test_pmax_shape_symmetry_and_range():
    X = np.random.default_rng(6).standard_normal((60, 5))
    P = pmax(X)
    assert P.shape == (5, 5)
    assert np.allclose(P, P.T)
    assert np.all(np.diag(P) == 1.0)
    off = P[np.triu_indices(5, k=1)]
    assert np.all((off >= 0.0) & (off <= 1.0))


def test_pmax_detects_direct_dependence():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((400, 4))
    X[:, 1] = 0.9 * X[:, 0] + 0.2 * rng.standard_normal(400)
    P = pmax(X)
    # directly linked pair survives every conditioning
    assert P[0, 1] < 1e-6
    # an independent pair does not look linked
    assert P[2, 3] > 1e-3


def test_pmax_conditioning_explains_away_common_cause():
    rng = np.random.default_rng(8)
    z = rng.standard_normal(500)
    X = np.column_stack(
        [
            z + 0.3 * rng.standard_normal(500),
            z + 0.3 * rng.standard_normal(500),
            rng.standard_normal(500),
            z,
        ]
    )
    P = pmax(X)
    # nodes 0 and 1 are correlated only through node 3; conditioning on it
    # pushes the pair's best p-value up
    assert P[0, 1] > 1e-3
    R = np.corrcoef(X, rowvar=False)
    assert abs(R[0, 1]) > 0.8  # raw correlation alone would declare an edge


def test_pmax_duplicate_column_never_wins_max():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((100, 4))
    X[:, 2] = X[:, 0]
    P = pmax(X)
    assert np.all(np.isfinite(P))
    # the duplicated pair is maximally dependent under every conditioning
    assert P[0, 2] < 1e-12


def test_pmax_rejects_constant_column():
    X = np.random.default_rng(10).standard_normal((30, 3))
    X[:, 1] = 2.0
    with pytest.raises(DomainError):
        pmax(X)


def test_family_is_nested_and_starts_empty():
    X = np.random.default_rng(11).standard_normal((80, 6))
    X[:, 1] += 0.8 * X[:, 0]
    X[:, 3] += 0.7 * X[:, 2]
    P = pmax(X)
    fam = c01_family(P, D=2)
    assert fam[0] == Graph.empty(6)
    assert fam.labels == ("c01",) * len(fam)
    for g1, g2 in zip(fam, list(fam)[1:]):
        assert set(g1.edges) <= set(g2.edges)
        assert g2.max_degree() <= 2
    assert len(fam) <= 6 * 2 + 1


def test_family_stops_before_degree_overflow():
    # hand-built P: three edges at node 0 with increasing p-values
    P = np.ones((4, 4))
    P[0, 1] = P[1, 0] = 0.01
    P[0, 2] = P[2, 0] = 0.02
    P[0, 3] = P[3, 0] = 0.03
    fam = c01_family(P, D=2)
    assert [g.n_edges for g in fam] == [0, 1, 2]
    assert all(g.max_degree() <= 2 for g in fam)


def test_family_batches_tied_thresholds():
    P = np.ones((4, 4))
    P[0, 1] = P[1, 0] = 0.05
    P[2, 3] = P[3, 2] = 0.05
    fam = c01_family(P, D=1)
    # both edges share one threshold so they enter in a single step
    assert [g.n_edges for g in fam] == [0, 2]


def test_family_input_validation():
    with pytest.raises(DomainError):
        c01_family(np.ones((3, 4)), D=1)
    bad = np.ones((3, 3))
    bad[0, 1] = 0.2
    with pytest.raises(DomainError):
        c01_family(bad, D=1)
    with pytest.raises(DomainError):
        c01_family(np.ones((3, 3)), D=-1)
