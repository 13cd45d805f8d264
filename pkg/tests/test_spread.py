import math

import numpy as np
import pytest

from robustlab import (
    build_graph,
    cover_down,
    estimate_spread,
    exact_triangle_factor,
    gen_gnp,
    gen_paley,
    sample_almost_factor,
    sample_spread_factor,
    sample_vortex,
)
from robustlab.errors import (
    CapExceededError,
    ParameterError,
    PipelineStageError,
    RegimeError,
    SearchBudgetError,
)
from robustlab.spread import TriangleMatching, pipeline_terminal_hi

from conftest import complete_graph, cycle_graph, random_small_graphs
from oracles import triangle_factor_exists_bruteforce


@pytest.fixture(scope="module")
def g300():
    return gen_gnp(300, 0.7, seed=7)


# -- triangle matchings ------------------------------------------------------


def test_matching_verification():
    k9 = complete_graph(9)
    m = TriangleMatching.build(k9, [(0, 1, 2), (3, 4, 5)])
    assert m.covered() == frozenset(range(6))
    with pytest.raises(ParameterError):
        TriangleMatching.build(k9, [(0, 1, 2), (2, 3, 4)])  # reuses 2
    with pytest.raises(ParameterError):
        TriangleMatching.build(cycle_graph(9), [(0, 1, 2)])  # not a triangle


# -- almost factor -----------------------------------------------------------


def test_almost_factor_k9():
    m = sample_almost_factor(complete_graph(9), q=1.0, eta=1 / 3, seed=0)
    assert len(m) == 2


def test_almost_factor_triangle_free_errors():
    with pytest.raises(RegimeError) as exc:
        sample_almost_factor(cycle_graph(12), q=2 / 11, eta=0.1, seed=0)
    assert exc.value.round_index == 0


def test_almost_factor_counts(g300):
    n = 300
    for eta in (0.1, 0.2):
        m = sample_almost_factor(g300, q=0.7, eta=eta, seed=1)
        t = math.ceil((1 - eta) * n / 3 - 1e-9)
        assert len(m) == t
        assert len(m.covered()) == 3 * t >= (1 - eta) * n


def test_almost_factor_deterministic(g300):
    a = sample_almost_factor(g300, q=0.7, eta=0.1, seed=5)
    b = sample_almost_factor(g300, q=0.7, eta=0.1, seed=5)
    assert a.triples == b.triples


# -- vortex -------------------------------------------------------------------


def test_vortex_param_errors(g300):
    with pytest.raises(ParameterError):
        sample_vortex(g300, alpha=0.999, gamma=0.3)
    with pytest.raises(ParameterError):
        sample_vortex(g300, alpha=0.5, gamma=-1)


def test_vortex_ladder_sizes():
    from robustlab.spread import _level_sizes

    assert _level_sizes(1000, 0.5, 20) == [1000, 250, 63, 16]


def test_vortex_audits(g300):
    vs = sample_vortex(g300, alpha=0.4, gamma=0.35, seed=3, terminal_hi=120)
    sizes = [len(l) for l in vs.levels]
    assert sizes == [300, 48]
    for i in range(vs.N):
        assert len(vs.levels[i + 1]) == math.ceil(0.4**2 * len(vs.levels[i]) - 1e-9)
        assert set(vs.levels[i + 1]) <= set(vs.levels[i])
    for audit in vs.audits:
        assert audit["degree_band_ok"] and audit["induced_band_ok"] and audit["lambda_ok"]


def test_vortex_paley109():
    # acceptance rate at this gamma is a few percent; the accepted sample
    # passes every audit by construction and the rejection count is recorded
    G = gen_paley(109)
    rejections = []
    for s in range(3):
        vs = sample_vortex(G, alpha=0.5, gamma=0.35, seed=s, max_retries=20000,
                           terminal_hi=pipeline_terminal_hi(109, 54, 0.5))
        rejections.append(vs.rejections)
        assert all(a["lambda_ok"] and a["degree_band_ok"] for a in vs.audits)
        assert [len(l) for l in vs.levels] == [109, 28]
    assert any(r > 0 for r in rejections)


def test_vortex_membership_bound(g300):
    from robustlab.spread import vortex_membership_spread_check

    rep = vortex_membership_spread_check(
        g300, 0.4, 0.35, vertices=(7,), levels=(0,), trials=10, terminal_hi=120
    )
    assert rep["frequency"] == 1.0 and rep["bound"] == 2.0
    rep1 = vortex_membership_spread_check(
        g300, 0.4, 0.35, vertices=(7,), levels=(1,), trials=60, terminal_hi=120
    )
    assert rep1["within_bound"]  # 2|V_1|/n = 0.32
    rep2 = vortex_membership_spread_check(
        g300, 0.4, 0.35, vertices=(7, 8), levels=(1, 1), trials=60, terminal_hi=120
    )
    assert rep2["bound"] == pytest.approx((2 * 48 / 300) ** 2)
    assert rep2["within_bound"]


# -- cover-down ---------------------------------------------------------------


def test_cover_down_empty_u(g300):
    with pytest.raises(ParameterError):
        cover_down(g300, [], q=0.7, alpha=0.4, c=0.4)


def test_cover_down_isolated_in_u_precondition():
    G = build_graph(6, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 4)])
    # vertex 5 has no neighbors in U = {4, 5}
    with pytest.raises(ParameterError):
        cover_down(G, [4, 5], q=0.5, alpha=0.6, c=0.5)


def test_cover_down_k90():
    K = complete_graph(90)
    U = list(range(75, 90))  # |U| = 15 = ceil(0.41^2 * 90)
    res = cover_down(K, U, q=1.0, alpha=0.41, c=0.5, seed=1)
    assert res.covered_in_u <= res.budget
    covered = res.matching.covered()
    assert set(range(75)) <= covered


def test_cover_down_budget_and_mandate(g300):
    vs = sample_vortex(g300, alpha=0.4, gamma=0.35, seed=3, terminal_hi=120)
    U = vs.levels[1]
    for seed in range(8):
        try:
            res = cover_down(g300, U, q=0.7, alpha=0.4, c=0.4, seed=seed)
        except (RegimeError, ParameterError):
            continue
        assert res.covered_in_u <= res.budget
        assert res.covered_in_u == 2 * len(res.branches)
        covered = res.matching.covered()
        assert set(range(300)) - set(U) <= covered
        assert len(covered & set(U)) == res.covered_in_u


# -- exact triangle factor ----------------------------------------------------


def test_exact_factor_examples():
    f = exact_triangle_factor(complete_graph(6))
    assert f is not None and len(f) == 2
    assert exact_triangle_factor(cycle_graph(9)) is None
    edges = [(i, j) for i in range(9) for j in range(i + 1, 9) if i // 3 != j // 3]
    f2 = exact_triangle_factor(build_graph(9, edges))
    assert f2 is not None


def test_exact_factor_errors():
    with pytest.raises(ParameterError):
        exact_triangle_factor(complete_graph(4))
    with pytest.raises(CapExceededError):
        exact_triangle_factor(complete_graph(123))
    with pytest.raises(SearchBudgetError):
        exact_triangle_factor(complete_graph(30), node_budget=3)


def test_exact_factor_matches_bruteforce_200():
    count = 0
    rng = np.random.default_rng(40)
    while count < 200:
        n = int(rng.choice([6, 9, 12]))
        G = gen_gnp(n, float(rng.uniform(0.2, 0.8)), seed=int(rng.integers(2**62)))
        got = exact_triangle_factor(G)
        want = triangle_factor_exists_bruteforce(G)
        assert (got is not None) == want
        if got is not None:
            got.verify(G)
        count += 1


# -- pipeline -----------------------------------------------------------------


def test_pipeline_k9():
    res = sample_spread_factor(complete_graph(9), alpha=0.5, gamma=0.6, seed=0)
    assert res.matching.covered() == frozenset(range(9))


def test_pipeline_triangle_free():
    with pytest.raises(PipelineStageError):
        sample_spread_factor(cycle_graph(9), alpha=0.5, gamma=0.6, seed=0)


def test_pipeline_g300(g300):
    ok = 0
    for seed in range(5):
        try:
            res = sample_spread_factor(g300, alpha=0.4, gamma=0.35, seed=seed)
        except PipelineStageError:
            continue
        res.matching.verify(g300)
        assert res.matching.covered() == frozenset(range(300))
        for audit in res.level_audits:
            assert audit["mandate_covered"] and audit["avoided_next2"]
            assert audit["covered_in_u"] <= audit["u_budget"]
        ok += 1
    assert ok >= 3


# -- spread estimation ----------------------------------------------------------


def test_estimate_spread_degenerate():
    k6 = complete_graph(6)
    factor = exact_triangle_factor(k6)
    est = estimate_spread(lambda s: factor, r=1, trials=50, q_target=0.1, seed=0)
    assert est.max_probability == 1.0
    assert est.max_ratio > 1  # degenerate sampler honestly exceeds any spread target


def test_estimate_spread_r2(g300):
    est = estimate_spread(
        lambda s: sample_almost_factor(g300, q=0.7, eta=0.1, seed=s),
        r=2,
        trials=30,
        q_target=0.01,
        seed=0,
    )
    assert est.r == 2 and est.trials == 30
    assert 0 < est.max_probability <= 1
    with pytest.raises(ParameterError):
        estimate_spread(lambda s: None, r=3, trials=10, q_target=0.1)
