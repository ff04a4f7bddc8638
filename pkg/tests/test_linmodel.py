import numpy as np
import pytest

from ggmselect import (
    DomainError,
    Graph,
    PenaltyParams,
    PenaltyTable,
    crit,
    fit_graph,
    fit_neighborhood,
    pen_table,
)
from ggmselect.linmodel import CritEvaluator
from oracles import ols_fit


def gaussian(n, p, seed):
    return np.random.default_rng(seed).standard_normal((n, p))


def zero_table(n, p, d_max):
    params = PenaltyParams(n=n, p=p, K=2.5, d_max=d_max)
    return PenaltyTable(params, np.zeros(d_max + 1))


def test_fit_matches_normal_equations():
    X = gaussian(30, 6, 0)
    for a, supp in [(0, [1, 2]), (3, [0, 1, 2, 4, 5]), (5, [2])]:
        fit = fit_neighborhood(X, a, supp)
        ref_coef, ref_rss = ols_fit(X, a, supp)
        assert np.allclose(fit.coef, ref_coef, atol=1e-10)
        assert fit.rss == pytest.approx(ref_rss, rel=1e-12)
        assert not fit.rank_deficient


def test_empty_support_is_zero_fit():
    X = gaussian(20, 4, 1)
    fit = fit_neighborhood(X, 2, [])
    assert fit.support == ()
    assert np.all(fit.coef == 0.0)
    assert fit.rss == pytest.approx(float(X[:, 2] @ X[:, 2]) / 20)


def test_residual_orthogonal_to_regressors():
    X = gaussian(25, 8, 2)
    fit = fit_neighborhood(X, 0, [3, 5, 7])
    r = X[:, 0] - X @ fit.coef
    assert np.max(np.abs(X[:, [3, 5, 7]].T @ r)) < 1e-9


def test_rss_decreases_along_nested_supports():
    X = gaussian(40, 7, 3)
    chain = [[], [1], [1, 4], [1, 4, 6], [1, 2, 4, 6]]
    vals = [fit_neighborhood(X, 0, s).rss for s in chain]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_rank_deficient_duplicate_column():
    X = gaussian(20, 5, 4)
    X[:, 3] = X[:, 1]
    fit = fit_neighborhood(X, 0, [1, 3])
    assert fit.rank_deficient
    # the projection itself is still unique
    _, ref_rss = ols_fit(X, 0, [1])
    assert fit.rss == pytest.approx(ref_rss, rel=1e-10)


def test_fit_validation_errors():
    X = gaussian(10, 4, 5)
    with pytest.raises(DomainError):
        fit_neighborhood(X, 1, [1, 2])
    with pytest.raises(DomainError):
        fit_neighborhood(X, 0, [2, 2])
    with pytest.raises(DomainError):
        fit_neighborhood(X, 0, [1, 2, 3, 1 + 3])  # out of range
    with pytest.raises(DomainError):
        fit_neighborhood(gaussian(4, 4, 6), 0, [1, 2, 3])  # > n - 2
    with pytest.raises(DomainError):
        fit_neighborhood(np.full((5, 3), np.nan), 0, [1])


def test_fit_graph_rows_are_neighborhood_fits():
    X = gaussian(30, 5, 7)
    G = Graph(5, [(0, 1), (0, 3), (2, 4)])
    theta = fit_graph(X, G)
    assert theta.shape == (5, 5)
    assert np.all(np.diag(theta) == 0.0)
    for a in range(5):
        row = fit_neighborhood(X, a, G.neighbors(a)).coef
        assert np.allclose(theta[a], row)
    # no edge -> zero entry
    assert theta[1, 3] == 0.0


def test_crit_empty_graph_closed_form():
    X = gaussian(30, 6, 8)
    pt = pen_table(PenaltyParams(n=30, p=6, K=2.5, d_max=3))
    expected = sum(
        (float(X[:, a] @ X[:, a]) / 30) * (1.0 + pt.pen(0) / 30) for a in range(6)
    )
    assert crit(X, Graph.empty(6), pt) == pytest.approx(expected, rel=1e-12)


def test_crit_is_sum_of_per_node_terms():
    X = gaussian(35, 6, 9)
    pt = pen_table(PenaltyParams(n=35, p=6, K=2.5, d_max=4))
    G = Graph(6, [(0, 1), (1, 2), (3, 4), (3, 5)])
    ev = CritEvaluator(X, pt)
    per = ev.per_node(G)
    assert per.shape == (6,)
    assert ev.graph_crit(G) == pytest.approx(per.sum())
    terms = [
        ev.node_rss(a, G.neighbors(a))
        * (1.0 + pt.pen(G.degree(a)) / (35 - G.degree(a)))
        for a in range(6)
    ]
    assert np.allclose(per, terms)


def test_crit_with_zero_penalty_is_plain_rss_sum():
    X = gaussian(25, 5, 10)
    pt = zero_table(25, 5, 3)
    G = Graph(5, [(0, 2), (1, 4)])
    expected = sum(fit_neighborhood(X, a, G.neighbors(a)).rss for a in range(5))
    assert crit(X, G, pt) == pytest.approx(expected, rel=1e-12)


def test_crit_larger_penalty_larger_value():
    X = gaussian(30, 6, 11)
    G = Graph(6, [(0, 1), (2, 3)])
    lo = pen_table(PenaltyParams(n=30, p=6, K=1.5, d_max=2))
    hi = pen_table(PenaltyParams(n=30, p=6, K=3.0, d_max=2))
    assert crit(X, G, hi) > crit(X, G, lo)


def test_evaluator_validates_dimensions_and_degree():
    X = gaussian(20, 5, 12)
    pt = pen_table(PenaltyParams(n=20, p=5, K=2.5, d_max=1))
    ev = CritEvaluator(X, pt)
    with pytest.raises(DomainError):
        ev.node_crit(0, [1, 2])  # degree above table range
    with pytest.raises(DomainError):
        CritEvaluator(X, pen_table(PenaltyParams(n=21, p=5, K=2.5, d_max=1)))
    with pytest.raises(DomainError):
        CritEvaluator(X, pen_table(PenaltyParams(n=20, p=6, K=2.5, d_max=1)))
    with pytest.raises(DomainError):
        ev.per_node(Graph.empty(4))


def test_evaluator_cache_consistency():
    X = gaussian(30, 6, 13)
    pt = pen_table(PenaltyParams(n=30, p=6, K=2.5, d_max=3))
    ev = CritEvaluator(X, pt)
    G = Graph(6, [(0, 1), (0, 2), (3, 4)])
    first = ev.graph_crit(G)
    again = ev.graph_crit(G)
    assert first == again
    assert again == pytest.approx(crit(X, G, pt), rel=1e-12)
