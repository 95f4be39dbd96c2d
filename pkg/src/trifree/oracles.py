"""Slow, obviously-correct reference computations used by the verify suite and the tests."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

import numpy as np


# ---------------------------------------------------------- process endpoints

def exhaustive_final_graphs(n: int) -> set[frozenset]:
    """Every maximal triangle-free graph the process can end in on n vertices."""
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]

    def open_pairs(edges: frozenset):
        nb = {v: set() for v in range(n)}
        for a, b in edges:
            nb[a].add(b)
            nb[b].add(a)
        return [(a, b) for a, b in all_pairs if (a, b) not in edges and not (nb[a] & nb[b])]

    @lru_cache(maxsize=None)
    def finals(edges: frozenset) -> frozenset:
        opts = open_pairs(edges)
        if not opts:
            return frozenset([edges])
        out = set()
        for p in opts:
            out |= finals(edges | {p})
        return frozenset(out)

    return set(finals(frozenset()))


# --------------------------------------------------------- building sequences

def _counts(pair, H: frozenset, base: frozenset):
    E, O = pair.structure.edges, pair.structure.open_edges
    e = sum(1 for p in E if p <= H) - sum(1 for p in E if p <= base)
    o = sum(1 for p in O if p <= H) - sum(1 for p in O if p <= base)
    return len(H) - len(base), e, o


def _rho_key(v: int, e: int, o: int):
    """Total order on times: zero < positive rationals < infinity."""
    if e >= 2 * v:
        return (0, Fraction(0))
    if o == 0:
        return (2, Fraction(0))
    return (1, Fraction(2 * v - e, 8 * o))


def brute_force_building_sequence(pair):
    """Chain search straight from the definition; asserts each stage has one maximal optimizer.

    Returns (chain of vertex sets, list of time keys).
    """
    A = frozenset(pair.anchor)
    free = [x for x in pair.vertices if x not in A]
    everything = frozenset(pair.vertices)

    def supersets(base):
        rest = [x for x in free if x not in base]
        for r in range(len(rest) + 1):
            for extra in combinations(rest, r):
                yield base | frozenset(extra)

    # stage 0: zero-time structures with the smallest idealized count at t = 1/2
    cands = []
    for H in supersets(A):
        v, e, o = _counts(pair, H, A)
        if e >= 2 * v:
            cands.append((H, (2 * v - e, -o)))
    best = min(k for _, k in cands)
    opt = [H for H, k in cands if k == best]
    maximal = [H for H in opt if not any(H < G for G in opt)]
    if len(maximal) != 1:
        raise AssertionError(f"stage 0 has {len(maximal)} maximal optimizers")
    chain = [maximal[0]]
    times = [(0, Fraction(0))]
    while chain[-1] != everything:
        cur = chain[-1]
        scored = [(H, _rho_key(*_counts(pair, H, cur))) for H in supersets(cur) if H != cur]
        best = min(k for _, k in scored)
        opt = [H for H, k in scored if k == best]
        maximal = [H for H in opt if not any(H < G for G in opt)]
        if len(maximal) != 1:
            raise AssertionError(f"stage {len(chain)} has {len(maximal)} maximal optimizers")
        chain.append(maximal[0])
        times.append(best)
    return chain, times


# ------------------------------------------------------------------ walks

def brute_force_walks(A: np.ndarray, O: np.ndarray, Y: dict, start: tuple[int, int], sigma: str):
    """List every σ-walk from the oriented pair ``start`` by scanning all vertices; returns (count, ΣY)."""
    n = A.shape[0]
    walks = [[start]]
    for label in sigma:
        nxt = []
        for w in walks:
            x, y = w[-1]
            for z in range(n):
                if label == "L" and A[x, z] and O[y, z]:
                    nxt.append(w + [(z, y)])
                if label == "R" and A[y, z] and O[x, z]:
                    nxt.append(w + [(x, z)])
        walks = nxt
    total = sum(Y[tuple(sorted(w[-1]))] for w in walks)
    return len(walks), total


def all_sigmas(max_len: int):
    for k in range(max_len + 1):
        for t in product("LR", repeat=k):
            yield "".join(t)
