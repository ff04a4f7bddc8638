import math

import numpy as np
import pytest

from ggmselect import (
    DomainError,
    PenaltyParams,
    PenaltyTable,
    dkhi,
    edkhi,
    fisher_tail,
    pen_table,
)
from oracles import mc_dkhi_plain, mc_pen


def quantile_for(p, d):
    log_binom = math.lgamma(p) - math.lgamma(d + 1) - math.lgamma(p - d)
    return math.exp(-(log_binom + 2.0 * math.log(d + 1)))


# ---------------------------------------------------------------------------
# fisher_tail


def test_fisher_tail_at_zero():
    for d in (1, 2, 5, 30):
        for N in (1, 4, 17, 200):
            assert fisher_tail(d, N, 0.0) == 1.0


def test_fisher_tail_symmetric_point():
    # F(1,1) is the ratio of two iid chi2_1; P(ratio >= 1) = 1/2 by symmetry
    assert abs(fisher_tail(1, 1, 1.0) - 0.5) < 1e-12


def test_fisher_tail_monte_carlo():
    rng = np.random.default_rng(20240517)
    draws = 10_000_000
    num = rng.chisquare(3, draws) / 3.0
    den = rng.chisquare(10, draws) / 10.0
    hits = (num >= 2.5 * den).mean()
    se = math.sqrt(hits * (1 - hits) / draws)
    assert abs(fisher_tail(3, 10, 2.5) - hits) <= 3 * se


def test_fisher_tail_bounds_and_monotone():
    fs = [fisher_tail(4, 12, f) for f in (0.1, 0.5, 1.0, 2.0, 8.0)]
    assert all(0.0 < v < 1.0 for v in fs)
    assert all(a > b for a, b in zip(fs, fs[1:]))


def test_fisher_tail_rejects_bad_dof():
    with pytest.raises(DomainError):
        fisher_tail(0, 5, 1.0)
    with pytest.raises(DomainError):
        fisher_tail(5, 0, 1.0)


# ---------------------------------------------------------------------------
# dkhi


def test_dkhi_tends_to_one_at_zero():
    for d, N in [(1, 10), (3, 20), (8, 5)]:
        assert abs(dkhi(d, N, 1e-12) - 1.0) < 1e-6


def test_dkhi_large_N_closed_form():
    # for d = 2 the N -> inf limit of d*DKhi is E[(X_2 - x)_+] = 2 exp(-x/2),
    # so at x = 2 ln 2 the value is 1/2
    val = dkhi(2, 10**6, 2.0 * math.log(2.0))
    assert abs(val - 0.5) < 1e-4
    for x in (0.5, 1.0, 3.0, 7.0):
        assert abs(2.0 * dkhi(2, 10**7, x) - 2.0 * math.exp(-x / 2.0)) < 1e-5


def test_dkhi_monte_carlo_spot_checks():
    cases = [(2, 1_000_000, 2.0 * math.log(2.0)), (3, 20, 1.0), (5, 40, 9.0)]
    for i, (d, N, x) in enumerate(cases):
        mc, se = mc_dkhi_plain(d, N, x, draws=2_000_000, seed=7_000 + i)
        assert abs(dkhi(d, N, x) - mc) <= 4 * se


def test_dkhi_strictly_decreasing_in_x():
    assert dkhi(3, 20, 1.0) > dkhi(3, 20, 5.0)
    for d, N in [(1, 9), (2, 30), (6, 14)]:
        xs = np.linspace(0.05, 25.0, 40)
        vals = [dkhi(d, N, x) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_dkhi_lower_bound_for_d_at_least_two():
    for d in (2, 3, 5, 9):
        for N in (5, 17, 60):
            for x in (0.2, 1.0, 4.0, 11.0, 20.0):
                assert d * dkhi(d, N, x) >= 2.0 * math.exp(-x / 2.0) - 1e-12


def test_dkhi_domain_errors():
    with pytest.raises(DomainError):
        dkhi(3, 20, 0.0)
    with pytest.raises(DomainError):
        dkhi(3, 20, -1.0)
    with pytest.raises(DomainError):
        dkhi(0, 20, 1.0)


# ---------------------------------------------------------------------------
# edkhi


def test_edkhi_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(25):
        d = int(rng.integers(1, 10))
        N = int(rng.integers(1, 80))
        x0 = float(rng.uniform(0.1, 30.0))
        q = dkhi(d, N, x0)
        if not 0.0 < q < 1.0:
            continue
        x = edkhi(d, N, q)
        assert abs(x - x0) <= 1e-6 * max(x0, 1.0)


def test_edkhi_near_one_gives_tiny_x():
    assert edkhi(3, 20, 1.0 - 1e-6) < 1e-3


def test_edkhi_decreasing_in_q():
    qs = [1e-6, 1e-4, 1e-2, 0.2, 0.8]
    vals = [edkhi(4, 25, q) for q in qs]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_edkhi_monotone_in_d_and_N():
    # increasing in d at fixed (N, q); decreasing in N at fixed (d, q)
    for q in (1e-5, 1e-2, 0.3):
        by_d = [edkhi(d, 30, q) for d in range(1, 8)]
        assert all(a < b for a, b in zip(by_d, by_d[1:]))
        by_N = [edkhi(3, N, q) for N in (6, 12, 24, 48, 96)]
        assert all(a > b for a, b in zip(by_N, by_N[1:]))


def test_edkhi_domain_errors():
    for q in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            edkhi(3, 20, q)


def test_edkhi_penalty_quantiles_exceed_dim():
    n, p = 50, 100
    dmax = int(math.exp(-1.5) * (p - 1))
    for d in range(1, min(dmax, 12) + 1):
        assert edkhi(d + 1, n - d - 1, quantile_for(p, d)) >= d + 1


# ---------------------------------------------------------------------------
# pen_table


def test_penalty_params_validation():
    PenaltyParams(n=9, p=2, K=1.01, d_max=0)
    with pytest.raises(DomainError):
        PenaltyParams(n=8, p=10, K=2.5, d_max=1)
    with pytest.raises(DomainError):
        PenaltyParams(n=50, p=10, K=1.0, d_max=3)
    with pytest.raises(DomainError):
        PenaltyParams(n=50, p=100, K=2.5, d_max=48)  # d_max > n - 3
    with pytest.raises(DomainError):
        PenaltyParams(n=50, p=10, K=2.5, d_max=-1)


def test_pen_table_shape_and_positivity():
    pt = pen_table(PenaltyParams(n=50, p=100, K=2.5, d_max=6))
    assert isinstance(pt, PenaltyTable)
    assert pt.values.shape == (7,)
    assert pt.values[0] == 0.0  # binomial term is 1 and (d+1)^2 = 1 at d = 0
    assert np.all(pt.values[1:] > 0.0)
    assert np.all(np.diff(pt.values) > 0.0)


def test_pen_table_gap_bound():
    for n, p in [(30, 20), (50, 100), (100, 500)]:
        for K in (1.5, 2.5, 3.0):
            dmax = min(n - 3, 10, p - 1)
            pt = pen_table(PenaltyParams(n=n, p=p, K=K, d_max=dmax))
            top = math.exp(-1.5) * (p - 1)
            for d1 in range(1, dmax + 1):
                if d1 > top:
                    continue
                for d2 in range(1, d1 + 1):
                    gap = pt.values[d1] - pt.values[d2]
                    bound = 2.0 * K * (d1 - d2) * math.log((p - d1) / d1)
                    assert gap >= bound - 1e-9


def test_pen_table_linear_growth_bound():
    c = 1.5
    for n, p, K in [(50, 100, 2.5), (100, 500, 2.5), (100, 20, 1.5)]:
        for gamma in (0.3, 0.6):
            cap = gamma * n / (2.0 * (1.1 + math.sqrt(math.log(p))) ** 2)
            dmax = min(int(cap), n - 3, p - 1)
            if dmax < 0:
                continue
            pt = pen_table(PenaltyParams(n=n, p=p, K=K, d_max=dmax))
            bound = c * K * (1.0 + math.exp(gamma) * math.sqrt(2.0 * math.log(p))) ** 2
            for d in range(dmax + 1):
                assert pt.values[d] <= bound * (d + 1)


def test_pen_table_quantile_roundtrip():
    n, p, K = 40, 60, 2.5
    pt = pen_table(PenaltyParams(n=n, p=p, K=K, d_max=5))
    for d in range(1, 6):
        x = pt.values[d] * (n - d - 1.0) / (K * (n - d))
        q = quantile_for(p, d)
        assert abs(dkhi(d + 1, n - d - 1, x) - q) <= 1e-6 * q


def test_pen_table_lookup_and_immutability():
    pt = pen_table(PenaltyParams(n=30, p=15, K=2.0, d_max=4))
    assert pt.pen(0) == pt.values[0]
    assert pt.pen(4) == pt.values[4]
    with pytest.raises(DomainError):
        pt.pen(5)
    with pytest.raises((ValueError, RuntimeError)):
        pt.values[0] = 1.0


def test_pen_zero_matches_monte_carlo_route():
    # the d = 0 quantile is exactly 1, which both routes map to 0
    assert mc_pen(50, 100, 2.5, 0) == 0.0
    pt = pen_table(PenaltyParams(n=50, p=100, K=2.5, d_max=0))
    assert pt.values[0] == 0.0


def test_pen_small_d_matches_monte_carlo_route():
    pt = pen_table(PenaltyParams(n=50, p=100, K=2.5, d_max=2))
    for d in (1, 2):
        ref = mc_pen(50, 100, 2.5, d, draws=2_000_000, seed=88_000 + d)
        assert abs(pt.values[d] - ref) <= 1e-3 * ref
