import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trifree import process as P
from trifree.oracles import exhaustive_final_graphs
from trifree.process import RunConfig, new_state


def graph_state(n, edges, full=True):
    s = new_state(RunConfig(n=n, instrumentation="full" if full else "light"))
    for u, v in edges:
        P.add_edge(s, u, v)
    return s


def test_new_state_counts():
    assert new_state(RunConfig(n=3)).q == 3
    assert new_state(RunConfig(n=10)).q == 45
    assert new_state(RunConfig(n=3)).m == 0


@pytest.mark.parametrize("seed", range(5))
def test_open_list_canonical_order(seed):
    s = new_state(RunConfig(n=4, seed=seed))
    assert s.open_pairs() == list(itertools.combinations(range(4), 2))


def test_n3_trajectory():
    s = new_state(RunConfig(n=3, seed=2))
    out = P.step(s)
    assert out.closed == [] and s.q == 2
    out = P.step(s)
    assert len(out.closed) == 1 and s.q == 0 and s.m == 2
    with pytest.raises(P.ProcessComplete):
        P.step(s)


def test_c5_closing_edge_closes_two_diagonals():
    s = graph_state(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    out = P.add_edge(s, 0, 4)
    assert sorted(out.closed) == [(0, 3), (1, 4)]


def test_add_edge_rejects_closed_pair():
    s = graph_state(4, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        P.add_edge(s, 0, 2)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_endpoint_sets_match_exhaustive_enumeration(n):
    allowed = {len(g) for g in exhaustive_final_graphs(n)}
    assert allowed == {3: {2}, 4: {3, 4}, 5: {4, 5, 6}}[n]
    for seed in range(60):
        s = new_state(RunConfig(n=n, seed=seed))
        P.advance(s, n * n)
        assert s.m in allowed
        assert P.is_maximal_triangle_free(P.dense_adjacency(s))


def test_y_count_hand_examples():
    s = graph_state(5, [])
    assert P.y_count(s, (0, 1)) == 0
    p3 = graph_state(4, [(1, 2), (2, 3)])
    assert not P.is_open(p3, 1, 3)
    star = graph_state(5, [(0, 1), (0, 2), (0, 3)])
    assert P.y_count(star, (1, 4)) == 1


def test_x_and_z_counts():
    n = 7
    empty = graph_state(n, [])
    assert P.x_count(empty, (0, 1)) == 2 * (n - 2)
    assert P.z_count(empty, (0, 1)) == 0
    s = graph_state(3, [(0, 1)])
    assert P.x_count(s, (0, 2)) == 0
    p3 = graph_state(3, [(0, 1), (1, 2)])
    assert P.z_count(p3, (0, 2)) == 1
    c4 = graph_state(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert P.z_count(c4, (0, 2)) == 2


@given(seed=st.integers(0, 2**32), frac=st.floats(0, 1))
@settings(max_examples=30)
def test_x_split_halves(seed, frac):
    s = new_state(RunConfig(n=14, seed=seed))
    probe = new_state(RunConfig(n=14, seed=seed))
    P.advance(probe, 200)
    P.advance(s, int(frac * probe.m))
    for e in s.open_pairs():
        xl, xr = P.x_count(s, e, split=True)
        assert xl == xr == P.x_count(s, e) // 2


def test_degrees():
    n = 6
    s = graph_state(n, [])
    assert (P.degree(s, 0), P.open_degree(s, 0)) == (0, n - 1)
    star = graph_state(4, [(0, 1), (0, 2), (0, 3)])
    assert (P.degree(star, 0), P.open_degree(star, 0)) == (3, 0)


@given(seed=st.integers(0, 2**32), steps=st.integers(0, 80))
@settings(max_examples=40)
def test_degree_partition(seed, steps):
    n = 16
    s = new_state(RunConfig(n=n, seed=seed))
    P.advance(s, steps)
    A = P.dense_adjacency(s)
    O = P.unpack_rows(s.opn, n)
    for v in range(n):
        closed = n - 1 - A[v].sum() - O[v].sum()
        assert P.degree(s, v) + P.open_degree(s, v) + closed == n - 1
        assert closed >= 0


@given(seed=st.integers(0, 2**32), n=st.integers(3, 30), frac=st.floats(0, 1))
@settings(max_examples=60)
def test_state_invariants_against_oracle(seed, n, frac):
    probe = new_state(RunConfig(n=n, seed=seed))
    P.advance(probe, n * n)
    s = new_state(RunConfig(n=n, seed=seed, instrumentation="full"))
    P.advance(s, int(frac * probe.m))
    assert P.oracle_mismatches(s) == []
    assert not np.any(s.adj & s.opn)
    O = P.unpack_rows(s.opn, n)
    assert np.array_equal(O, O.T)
    assert s.q == int(np.bitwise_count(s.opn).sum()) // 2
    assert s.ybb == sum(s.y_counters.values())
    for e, y in s.y_counters.items():
        assert y == P.y_count(s, e)


def test_fresh_state_matches_oracle():
    s = new_state(RunConfig(n=12, instrumentation="full"))
    orc = P.recompute_oracle(s)
    assert orc.q == 66 and orc.ybb == 0
    assert P.oracle_mismatches(s, orc) == []


@given(seed=st.integers(0, 2**32), n=st.integers(3, 25))
@settings(max_examples=40)
def test_light_and_full_modes_follow_same_trajectory(seed, n):
    a = new_state(RunConfig(n=n, seed=seed))
    b = new_state(RunConfig(n=n, seed=seed, instrumentation="full"))
    P.advance(a, n * n)
    P.advance(b, n * n)
    assert np.array_equal(a.edges(), b.edges())


@given(seed=st.integers(0, 2**32), cut=st.integers(0, 100))
@settings(max_examples=40)
def test_history_replay_and_restore(seed, cut):
    n = 20
    whole = new_state(RunConfig(n=n, seed=seed))
    P.advance(whole, n * n)
    part = new_state(RunConfig(n=n, seed=seed))
    P.advance(part, min(cut, whole.m))
    again = P.restore(P.snapshot(part))
    assert np.array_equal(again.adj, part.adj) and np.array_equal(again.opn, part.opn)
    P.advance(again, n * n)
    assert np.array_equal(again.edges(), whole.edges())


def test_snapshot_file_round_trip(tmp_path):
    s = new_state(RunConfig(n=30, seed=4))
    P.advance(s, 40)
    path = tmp_path / "snap.jsonl"
    P.save_snapshot(s, path)
    P.advance(s, 60)
    P.save_snapshot(s, path)
    first = P.load_snapshot(path, index=0)
    last = P.load_snapshot(path)
    assert first.m == 40 and last.m == 60
    assert np.array_equal(last.edges(), s.edges())


def test_restore_rejects_bad_snapshots():
    s = new_state(RunConfig(n=6, seed=1))
    P.advance(s, 3)
    snap = P.snapshot(s)
    with pytest.raises(ValueError):
        P.restore({**snap, "format_version": 99})
    with pytest.raises(ValueError):
        P.restore({**snap, "m": 2})
    bad = dict(snap)
    bad["edges"] = snap["edges"] + [snap["edges"][0]]
    bad["m"] = len(bad["edges"])
    with pytest.raises(ValueError):
        P.restore(bad)


def test_export_and_read_graph(tmp_path):
    s = new_state(RunConfig(n=25, seed=9))
    P.advance(s, 10**4)
    P.export_graph(s, tmp_path / "g.txt")
    n, edges = P.read_graph(tmp_path / "g.txt")
    assert n == 25 and np.array_equal(edges, s.edges())


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(n=1)
    with pytest.raises(ValueError):
        RunConfig(n=10**6)
    with pytest.raises(ValueError):
        RunConfig(n=10, max_steps=3, until_t=0.1)
    with pytest.raises(ValueError):
        RunConfig(n=10, instrumentation="verbose")


def test_until_t_stop_rule():
    n = 256
    cfg = RunConfig(n=n, seed=1, until_t=0.5)
    s = new_state(cfg)
    P.advance(s, cfg.stop_m)
    assert s.m / n**1.5 >= 0.5 > (s.m - 1) / n**1.5


def test_run_records_every_and_final():
    n = 64
    cfg = RunConfig(n=n, seed=3, record_every=50)
    s, recs = P.run(new_state(cfg), cfg)
    ms = [r.m for r in recs]
    assert ms[0] == 0 and ms[-1] == s.m and s.q == 0
    assert all(m % 50 == 0 for m in ms[:-1])
    assert ms == sorted(set(ms))
