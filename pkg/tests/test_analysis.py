import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trifree import analysis as AN
from trifree import process as P
from trifree.process import RunConfig, new_state

C5 = (5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
K23 = (5, [(a, b) for a in (0, 1) for b in (2, 3, 4)])


def final_state(n, seed):
    s = new_state(RunConfig(n=n, seed=seed))
    P.advance(s, n * n)
    return s


def brute_alpha(n, edges):
    E = {frozenset(e) for e in edges}
    for k in range(n, 0, -1):
        for c in itertools.combinations(range(n), k):
            if not any(frozenset(p) in E for p in itertools.combinations(c, 2)):
                return k
    return 0


@st.composite
def small_graphs(draw, max_n=13):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    edges = [p for p in pairs if draw(st.booleans())] if pairs else []
    return n, edges


def test_alpha_known_values():
    assert AN.alpha_exact(C5) == 2
    assert AN.alpha_exact(K23) == 3
    assert AN.alpha_exact((9, [])) == 9
    assert AN.alpha_heuristic((9, [])) == 9
    for b in (1, 2, 5):
        assert AN.alpha_heuristic(C5, budget=b) == 2


@given(small_graphs())
@settings(max_examples=80)
def test_alpha_exact_matches_brute_force(g):
    n, edges = g
    assert AN.alpha_exact(g) == brute_alpha(n, edges)
    iset = AN.max_independent_set(g)
    assert AN.is_independent(g, iset)


@given(small_graphs(max_n=16), st.integers(0, 1000))
@settings(max_examples=60)
def test_heuristic_is_a_valid_lower_bound(g, seed):
    h = AN.independent_set_heuristic(g, seed=seed)
    assert AN.is_independent(g, h)
    assert len(h) <= AN.alpha_exact(g)


@pytest.mark.parametrize("n,seed", [(40, 0), (80, 1), (120, 2), (120, 3), (160, 4)])
def test_heuristic_vs_exact_on_process_graphs(n, seed):
    s = final_state(n, seed)
    exact = AN.alpha_exact(s)
    h = AN.alpha_heuristic(s, budget=2)
    assert h <= exact
    assert h >= exact - 2


def test_exact_guard_and_budget():
    s = final_state(60, 1)
    with pytest.raises(ValueError):
        AN.alpha_exact(s, guard=50)
    with pytest.raises(AN.SolverBudgetExceeded):
        AN.alpha_exact(final_state(200, 0), node_limit=50)


def test_as_bit_rows_validation():
    with pytest.raises(ValueError):
        AN.as_bit_rows((3, [(0, 0)]))
    with pytest.raises(ValueError):
        AN.as_bit_rows(np.array([[0, 1], [0, 0]], dtype=bool))


def test_degree_stats():
    d = AN.max_degree_stats(new_state(RunConfig(n=6)))
    assert d.max == 0 and d.histogram == {0: 6}
    star = new_state(RunConfig(n=4))
    for v in (1, 2, 3):
        P.add_edge(star, 0, v)
    d = AN.max_degree_stats(star)
    assert d.max == 3 and d.argmax == [0]


@given(st.integers(0, 2**32), st.integers(4, 60))
@settings(max_examples=30)
def test_degree_histogram_sums_to_n(seed, n):
    d = AN.max_degree_stats(final_state(n, seed))
    assert sum(d.histogram.values()) == n
    assert d.max == max(d.histogram)


def test_moments_empty_graph():
    n = 30
    ms = AN.moment_stats(new_state(RunConfig(n=n)))
    assert (ms.ybar, ms.xbar, ms.var_y, ms.cov_xy) == (0, 2 * (n - 2), 0, 0)


def test_moments_constant_field():
    s = new_state(RunConfig(n=6))
    for u, v in [(0, 1), (2, 3), (4, 5)]:
        P.add_edge(s, u, v)
    assert AN.moment_stats(s).var_y == 0


@given(st.integers(0, 2**32), st.floats(0, 1))
@settings(max_examples=30)
def test_moments_match_oracle(seed, frac):
    n = 25
    probe = final_state(n, seed)
    s = new_state(RunConfig(n=n, seed=seed))
    P.advance(s, int(frac * (probe.m - 1)))
    orc = P.recompute_oracle(s)
    ms = AN.moment_stats(s)
    ys = orc.y_values.astype(float)
    A, O = orc.adjacency, orc.openness
    xs = np.array([2 * np.sum(O[a] & O[b]) for a, b in orc.pairs], dtype=float)
    assert ms.exact and ms.sum_y == orc.ybb and ms.sum_x == orc.xbb
    assert ms.ybar == pytest.approx(ys.mean())
    assert ms.var_y == pytest.approx(ys.var(), abs=1e-9)
    assert ms.cov_xy == pytest.approx(np.mean(xs * ys) - xs.mean() * ys.mean(), abs=1e-9)


def test_sampled_moments_agree_with_sweep():
    n = 400
    s = new_state(RunConfig(n=n, seed=5))
    P.advance(s, int(0.3 * n**1.5))
    full = AN.moment_stats(s)
    samp = AN.moment_stats(s, sample_size=4000, sweep_limit=0)
    assert not samp.exact and samp.sample_size == 4000
    se = math.sqrt(full.var_y / 4000)
    assert abs(samp.ybar - full.ybar) <= 3 * se
    again = AN.moment_stats(s, sample_size=4000, sweep_limit=0)
    assert again.ybar == samp.ybar


def test_open_triangles_empty():
    n = 9
    assert AN.open_triangle_count(new_state(RunConfig(n=n))) == math.comb(n, 3)


def test_set_profile_examples():
    n = 20
    prof = AN.set_profile(new_state(RunConfig(n=n)), range(8))
    assert prof.o_S == math.comb(8, 2) and prof.J == []
    star = new_state(RunConfig(n=4))
    for v in (1, 2, 3):
        P.add_edge(star, 0, v)
    assert AN.set_profile(star, [1, 2, 3]).o_S == 0
    s = final_state(40, 2)
    S = list(range(15))
    assert AN.set_profile(s, S, family=[S]).o_N == 0


def test_set_profile_thresholds():
    n = 100
    s = new_state(RunConfig(n=n, seed=1))
    P.advance(s, 300)
    prof = AN.set_profile(s, range(30), delta_exp=0.2, eps=0.1)
    t = 300 / n**1.5
    assert prof.a_threshold == pytest.approx(0.9 * math.comb(30, 2) * math.exp(-4 * t * t))
    assert prof.a_prime_threshold == pytest.approx(
        0.9 * (math.comb(30, 2) - 2 * 300**2 / n**2) * math.exp(-4 * t * t))
    assert all(x >= n**0.2 for x in prof.a)
    assert prof.a == sorted(prof.a, reverse=True)
    with pytest.raises(ValueError):
        AN.set_profile(s, [n + 1])


@pytest.mark.parametrize("seed", range(8))
def test_witness_n5(seed):
    cert = AN.ramsey_witness(RunConfig(n=5, seed=seed))
    expected = {4: 4, 5: 2, 6: 3}[len(cert.edges)]
    assert cert.alpha_kind == "exact" and cert.alpha_value == expected
    assert cert.claim == f"R(3, {expected + 1}) > 5"
    assert json.loads(cert.to_json())["claim"] == cert.claim


def test_heuristic_witness_has_no_claim():
    cert = AN.ramsey_witness(RunConfig(n=450, seed=1), guard=400)
    assert cert.alpha_kind == "heuristic_lower_bound" and cert.claim is None
    assert "claim" not in json.loads(cert.to_json())
    assert AN.is_independent((450, cert.edges), cert.independent_set)


def test_witness_budget_fallback():
    cert = AN.ramsey_witness(RunConfig(n=200, seed=0), node_limit=100)
    assert cert.alpha_kind == "heuristic_lower_bound" and cert.claim is None
