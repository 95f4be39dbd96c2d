"""The Y-graph of a frozen process state and oriented walks in it.

An oriented open pair is written (x, y): x carries the label L, y the label R.
An L-step moves the L endpoint: (x, y) -> (z, y) with {x, z} an edge and
{y, z} open.  An R-step moves the R endpoint symmetrically.  The vertex that
stays keeps its label.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby

import numpy as np

from .process import ProcessState


def _ints(rows: np.ndarray, n: int) -> list[int]:
    b = rows.view(np.uint8)
    return [int.from_bytes(b[i].tobytes(), "little") for i in range(n)]


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass
class YAdjacency:
    target: int  # index of the neighbouring open pair
    pivot: int  # shared vertex
    moved_from: int
    moved_to: int


class YGraph:
    """Immutable Y-graph over the open pairs of a state."""

    def __init__(self, state: ProcessState):
        n = state.n
        self.n = n
        self.m = state.m
        self.adj = _ints(state.adj, n)
        self.opn = _ints(state.opn, n)
        pairs = sorted(state.open_pairs())
        self.pairs = pairs
        self.index = {p: i for i, p in enumerate(pairs)}
        self.nbrs: list[list[YAdjacency]] = []
        for u, v in pairs:
            lst = []
            for pivot, other in ((u, v), (v, u)):
                # {pivot, w} open and {other, w} an edge
                for w in _bits(self.opn[pivot] & self.adj[other]):
                    lst.append(YAdjacency(self.index[_key(pivot, w)], pivot, other, w))
            lst.sort(key=lambda a: a.target)
            self.nbrs.append(lst)
        self.y = np.array([len(lst) for lst in self.nbrs], dtype=np.int64)

    @property
    def num_vertices(self) -> int:
        return len(self.pairs)

    def edges(self) -> set[tuple[int, int]]:
        return {(min(i, a.target), max(i, a.target)) for i, lst in enumerate(self.nbrs) for a in lst}

    def is_symmetric(self) -> bool:
        nb = [set(a.target for a in lst) for lst in self.nbrs]
        return all(i in nb[j] for i in range(len(nb)) for j in nb[i])

    def is_triangle_free(self) -> bool:
        nb = [set(a.target for a in lst) for lst in self.nbrs]
        for i in range(len(nb)):
            for j in nb[i]:
                if j > i and nb[i] & nb[j]:
                    return False
        return True

    def y_of(self, e) -> int:
        return int(self.y[self._idx(e)])

    def _idx(self, e) -> int:
        k = _key(int(e[0]), int(e[1]))
        if k not in self.index:
            raise ValueError(f"pair {e} is not open")
        return self.index[k]

    def step(self, oriented: tuple[int, int], label: str):
        """Oriented pairs reachable by one step of the given label."""
        x, y = oriented
        if label == "L":
            return [(z, y) for z in _bits(self.adj[x] & self.opn[y])]
        if label == "R":
            return [(x, z) for z in _bits(self.adj[y] & self.opn[x])]
        raise ValueError(f"label must be 'L' or 'R', got {label!r}")

    def y_at(self, oriented: tuple[int, int]) -> int:
        return int(self.y[self.index[_key(*oriented)]])


def build(state: ProcessState) -> YGraph:
    return YGraph(state)


@dataclass(frozen=True)
class WalkSpec:
    sigma: str

    def __post_init__(self):
        if any(c not in "LR" for c in self.sigma):
            raise ValueError("sigma must be a word over {L, R}")

    def __len__(self):
        return len(self.sigma)

    @property
    def foot_changes(self) -> int:
        return sum(1 for a, b in zip(self.sigma, self.sigma[1:]) if a != b)

    def mirror(self) -> "WalkSpec":
        return WalkSpec(self.sigma.translate(str.maketrans("LR", "RL")))


def is_k_short(sigma, k: int) -> bool:
    """Every run of equal labels has length <= k and there are <= k changes of foot."""
    w = sigma if isinstance(sigma, WalkSpec) else WalkSpec(sigma)
    runs = [len(list(g)) for _, g in groupby(w.sigma)]
    return all(r <= k for r in runs) and w.foot_changes <= k


def _orient(yg: YGraph, e, left: int) -> tuple[int, int]:
    u, v = int(e[0]), int(e[1])
    yg._idx((u, v))
    if left not in (u, v):
        raise ValueError(f"orientation vertex {left} is not an endpoint of {e}")
    return (u, v) if left == u else (v, u)


def _propagate(yg: YGraph, start: tuple[int, int], sigma: str) -> dict:
    weights = {start: 1}
    for label in sigma:
        nxt = defaultdict(int)
        for o, c in weights.items():
            for t in yg.step(o, label):
                nxt[t] += c
        weights = nxt
    return weights


def u_walks(yg: YGraph, e, left: int, sigma) -> int:
    """Number of σ-walks from e with ``left`` labelled L."""
    s = sigma.sigma if isinstance(sigma, WalkSpec) else WalkSpec(sigma).sigma
    return sum(_propagate(yg, _orient(yg, e, left), s).values())


def v_average_exact(yg: YGraph, e, left: int, sigma) -> Fraction:
    s = sigma.sigma if isinstance(sigma, WalkSpec) else WalkSpec(sigma).sigma
    w = _propagate(yg, _orient(yg, e, left), s)
    total = sum(w.values())
    if total == 0:
        raise ValueError(f"no {s or 'empty'}-walks from {e}; the average is undefined")
    return Fraction(sum(c * yg.y_at(o) for o, c in w.items()), total)


def v_average(yg: YGraph, e, left: int, sigma) -> float:
    """Average of Y over the endpoints of the σ-walks from e."""
    return float(v_average_exact(yg, e, left, sigma))


def v_k(yg: YGraph, e, k: int) -> tuple[int, float]:
    """(U^(k), V^(k)): count of k-step Y-graph walks from e and the mean Y at their ends."""
    if k < 0:
        raise ValueError("k must be non-negative")
    w = np.zeros(yg.num_vertices, dtype=object)
    w[yg._idx(e)] = 1
    for _ in range(k):
        nxt = np.zeros_like(w)
        for i in np.nonzero(w)[0]:
            for a in yg.nbrs[i]:
                nxt[a.target] += w[i]
        w = nxt
    total = int(w.sum())
    if total == 0:
        raise ValueError(f"no {k}-step walks from {e}")
    return total, float(Fraction(int(np.dot(w, yg.y.astype(object))), total))


@dataclass
class MixingReport:
    k: int
    foot: int
    v_lk: float
    v_lk1: float
    q_u_average: float
    ybar: float
    gap_steps: float
    gap_neighbourhood: float


def mixing_stats(yg: YGraph, state: ProcessState, e, k: int, left: int | None = None) -> MixingReport:
    """Compare L^k and L^{k+1} walk averages with the mean Y over the foot's open neighbourhood."""
    u, v = int(e[0]), int(e[1])
    left = u if left is None else left
    x, foot = _orient(yg, e, left)
    q_u = [w for w in _bits(yg.opn[foot])]
    if not q_u:
        raise ValueError(f"foot {foot} has no open neighbours")
    try:
        vk = v_average(yg, e, left, "L" * k)
        vk1 = v_average(yg, e, left, "L" * (k + 1))
    except ValueError as err:
        raise ValueError(f"edge {e} is isolated in the Y-graph along L-steps") from err
    avg = float(np.mean([yg.y_at((w, foot)) for w in q_u]))
    ybar = float(yg.y.mean()) if yg.num_vertices else float("nan")
    return MixingReport(k, foot, vk, vk1, avg, ybar, abs(vk - vk1), abs(vk1 - avg))
