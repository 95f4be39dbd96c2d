"""Instrumented runs that test the engine step by step against brute force.

Each check returns a list of human-readable violations (empty means pass).
The engine is reached through ``process.step`` at call time, so a test can
substitute a faulty step and watch the right check fail.
"""

from __future__ import annotations

import random
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import process
from .analysis import open_triangle_count
from .oracles import all_sigmas, brute_force_building_sequence, brute_force_walks
from .process import RunConfig, new_state, oracle_mismatches, recompute_oracle
from .structures import (ZERO, AnchoredPair, building_sequence, c_value, derived_families,
                         is_balanced, is_permissible, min_rho)
from .ygraph import build, u_walks, v_average_exact


def _y_dense(A: np.ndarray, O: np.ndarray, a: int, b: int) -> int:
    """Y of the pair {a, b}, straight from dense matrices."""
    return int(np.sum(O[a] & A[b]) + np.sum(O[b] & A[a]))


@dataclass
class StepAudit:
    steps: int = 0
    oracle: list = field(default_factory=list)
    delta_q: list = field(default_factory=list)
    delta_ybb: list = field(default_factory=list)


def audit_run(n: int, seed: int, oracle_every_step: bool = True, max_report: int = 5) -> StepAudit:
    """Run to completion in full mode, checking both per-step identities and oracle equality."""
    st = new_state(RunConfig(n=n, seed=seed, instrumentation="full"))
    audit = StepAudit()
    before = recompute_oracle(st)
    while st.q > 0:
        q0 = st.q
        out = process.step(st)
        audit.steps += 1
        after = recompute_oracle(st)
        u, v = out.chosen
        A, O = before.adjacency, before.openness
        y_e = _y_dense(A, O, u, v)
        if st.q - q0 != -(y_e + 1) or out.y_of_chosen != y_e:
            audit.delta_q.append(f"n={n} seed={seed} m={st.m}: dQ={st.q - q0}, Y_e={y_e}")
        x_e = 2 * int(np.sum(O[u] & O[v]))
        y_nbrs = [(u, w) for w in np.nonzero(O[u] & A[v])[0]] + [(v, w) for w in np.nonzero(O[v] & A[u])[0]]
        rhs = x_e - 2 * sum(_y_dense(A, O, int(a), int(b)) for a, b in y_nbrs)
        lhs = after.ybb - before.ybb
        if lhs != rhs or out.delta_ybb != rhs:
            audit.delta_ybb.append(
                f"n={n} seed={seed} m={st.m}: dYY={lhs}, engine={out.delta_ybb}, X_e-2sum={rhs}")
        if oracle_every_step or st.q == 0:
            bad = oracle_mismatches(st, after)
            if bad:
                audit.oracle.append(f"n={n} seed={seed} m={st.m}: {','.join(bad)}")
        before = after
        if len(audit.oracle) + len(audit.delta_q) + len(audit.delta_ybb) >= max_report:
            break
    return audit


def ygraph_structure(n: int, seed: int, samples: int = 5) -> list[str]:
    """Structural Y-graph invariants at evenly spaced stops."""
    probe = new_state(RunConfig(n=n, seed=seed))
    process.advance(probe, n * n)
    total = probe.m
    bad = []
    for k in range(samples):
        m = (total * k) // samples
        st = new_state(RunConfig(n=n, seed=seed))
        process.advance(st, m)
        yg = build(st)
        orc = recompute_oracle(st)
        tag = f"n={n} seed={seed} m={m}"
        if not yg.is_symmetric():
            bad.append(f"{tag}: Y-graph not symmetric")
        if not yg.is_triangle_free():
            bad.append(f"{tag}: Y-graph has a triangle")
        if int(yg.y.sum()) != 2 * len(yg.edges()) or orc.ybb != 2 * orc.ygraph_edges:
            bad.append(f"{tag}: sum of Y != 2|E(Y-graph)|")
        if orc.xbb != 6 * open_triangle_count(st):
            bad.append(f"{tag}: sum of X != 6 * open triangles")
    return bad


def random_pair(rnd: random.Random, max_free: int = 6, max_anchor: int = 3) -> AnchoredPair:
    """A random permissible anchored pair."""
    while True:
        k = rnd.randint(0, max_free)
        a = rnd.randint(0, max_anchor)
        names = [f"a{i}" for i in range(a)] + [f"v{i}" for i in range(k)]
        E, O = [], []
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                r = rnd.random()
                if r < 0.25:
                    E.append((names[i], names[j]))
                elif r < 0.55:
                    O.append((names[i], names[j]))
        pair = AnchoredPair.build(names, names[:a], E, O)
        if is_permissible(pair.structure):
            return pair


def building_sequences(count: int, seed: int = 0, max_free: int = 6) -> list[str]:
    rnd = random.Random(seed)
    bad = []
    for i in range(count):
        pair = random_pair(rnd, max_free)
        bs = building_sequence(pair)
        chain, times = brute_force_building_sequence(pair)
        if bs.chain != chain:
            bad.append(f"pair {i}: chain {bs.chain} != brute force {chain}")
        if any(not bs.times[j] < bs.times[j + 1] for j in range(len(bs.times) - 1)):
            bad.append(f"pair {i}: times not increasing")
        links = [(bs.chain[0], frozenset(pair.anchor))] + list(zip(bs.chain[1:], bs.chain[:-1]))
        for hi, lo in links:
            if not is_balanced(pair.induced(hi, anchor=lo)):
                bad.append(f"pair {i}: link {sorted(lo)} -> {sorted(hi)} not balanced")
        if min_rho(pair) > ZERO and c_value(pair) < 2:
            bad.append(f"pair {i}: c < 2")
        if len(derived_families(pair, "open")) != pair.e:
            bad.append(f"pair {i}: |F_open| != e(F)")
    return bad


def endpoint_sets(seeds: range) -> list[str]:
    allowed = {3: {2}, 4: {3, 4}, 5: {4, 5, 6}}
    bad = []
    for n, ok in allowed.items():
        for s in seeds:
            st = new_state(RunConfig(n=n, seed=s))
            process.advance(st, n * n)
            if st.m not in ok or not process.is_maximal_triangle_free(process.dense_adjacency(st)):
                bad.append(f"n={n} seed={s}: final edges {st.m}")
    return bad


def walk_counts(states: int, seed: int = 0, max_len: int = 4) -> list[str]:
    """σ-walk DP against exhaustive enumeration on small random states."""
    rnd = random.Random(seed)
    sigmas = list(all_sigmas(max_len))
    bad = []
    for i in range(states):
        n = rnd.randint(5, 12)
        st = new_state(RunConfig(n=n, seed=rnd.randrange(2**32)))
        probe = new_state(RunConfig(n=n, seed=st.seed))
        process.advance(probe, n * n)
        process.advance(st, rnd.randint(0, max(probe.m - 1, 0)))
        yg = build(st)
        orc = recompute_oracle(st)
        ydict = orc.y
        for u, v in yg.pairs:
            y_e = ydict[(u, v)]
            for left, right in ((u, v), (v, u)):
                tag = f"state {i} (n={n}, m={st.m}) pair ({left},{right})"
                if u_walks(yg, (u, v), left, "L") + u_walks(yg, (u, v), left, "R") != y_e:
                    bad.append(f"{tag}: U^L + U^R != Y_e")
                if v_average_exact(yg, (u, v), left, "") != y_e:
                    bad.append(f"{tag}: V of the empty word != Y_e")
                for sg in sigmas:
                    cnt, tot = brute_force_walks(orc.adjacency, orc.openness, ydict, (left, right), sg)
                    if u_walks(yg, (u, v), left, sg) != cnt:
                        bad.append(f"{tag} sigma={sg!r}: walk count differs")
                    elif cnt and v_average_exact(yg, (u, v), left, sg) != Fraction(tot, cnt):
                        bad.append(f"{tag} sigma={sg!r}: walk average differs")
        if len(bad) > 20:
            break
    return bad
