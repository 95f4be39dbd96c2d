"""Measurements on process states and final graphs: degrees, moments, independence number, witnesses."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from . import _mis
from .rng import MASK64
from .process import (
    ProcessState,
    RunConfig,
    advance,
    degrees,
    is_maximal_triangle_free,
    new_state,
    pack_rows,
    unpack_rows,
)

EXACT_GUARD = 400
SWEEP_LIMIT = 200_000


class SolverBudgetExceeded(RuntimeError):
    """The exact solver hit its node limit before proving optimality."""


# ------------------------------------------------------------------ graphs

def as_bit_rows(graph) -> tuple[int, np.ndarray]:
    """Normalise any supported graph form to (n, bit rows)."""
    if isinstance(graph, ProcessState):
        return graph.n, graph.adj
    if isinstance(graph, tuple) and len(graph) == 2 and np.isscalar(graph[0]):
        n, edges = graph
        A = np.zeros((n, n), dtype=bool)
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop in edge list")
            A[a, b] = A[b, a] = True
        return n, pack_rows(A)
    A = np.asarray(graph, dtype=bool)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square adjacency matrix")
    if np.any(np.diag(A)) or not np.array_equal(A, A.T):
        raise ValueError("adjacency must be symmetric with an empty diagonal")
    return A.shape[0], pack_rows(A)


def _bits_to_set(bits: np.ndarray, n: int) -> list[int]:
    row = unpack_rows(bits.reshape(1, -1), n)[0]
    return [int(v) for v in np.nonzero(row)[0]]


def is_independent(graph, vertices) -> bool:
    n, adj = as_bit_rows(graph)
    A = unpack_rows(adj, n)
    vs = list(vertices)
    if len(set(vs)) != len(vs):
        return False
    return not A[np.ix_(vs, vs)].any()


# ------------------------------------------------------------------ degrees

@dataclass
class DegreeStats:
    max: int
    argmax: list[int]
    histogram: dict[int, int]


def max_degree_stats(state_or_graph) -> DegreeStats:
    if isinstance(state_or_graph, ProcessState):
        d = degrees(state_or_graph)
    else:
        n, adj = as_bit_rows(state_or_graph)
        d = K.row_counts(adj, n)
    mx = int(d.max()) if len(d) else 0
    vals, counts = np.unique(d, return_counts=True)
    return DegreeStats(mx, [int(v) for v in np.nonzero(d == mx)[0]],
                       {int(a): int(b) for a, b in zip(vals, counts)})


# ------------------------------------------------------------ independence

def max_independent_set(graph, guard: int = EXACT_GUARD, node_limit: int = 0) -> list[int]:
    """An optimal independent set by branch and bound (node_limit 0 = unlimited)."""
    n, adj = as_bit_rows(graph)
    if n > guard:
        raise ValueError(f"exact solver limited to n <= {guard}, got n = {n}")
    if n == 0:
        return []
    adj = np.ascontiguousarray(adj)
    size, bits = _mis.greedy_min_degree(adj, n, 0)
    best, best_bits, nodes, done = _mis.mis_branch_and_bound(adj, n, size, bits, node_limit)
    if not done:
        raise SolverBudgetExceeded(f"gave up after {nodes} nodes with best {best}")
    return _bits_to_set(best_bits, n)


def alpha_exact(graph, guard: int = EXACT_GUARD, node_limit: int = 0) -> int:
    return len(max_independent_set(graph, guard, node_limit))


def _csr(adj: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    A = unpack_rows(adj, n)
    rows, cols = np.nonzero(A)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, rows + 1, 1)
    return np.cumsum(ptr), cols.astype(np.int64)


def independent_set_heuristic(graph, budget: int = 1, iterations: int | None = None,
                              seed: int = 0) -> list[int]:
    """Best set over ``budget`` restarts of randomized greedy plus iterated (1,2)-swap search."""
    n, adj = as_bit_rows(graph)
    if n == 0:
        return []
    adj = np.ascontiguousarray(adj)
    ptr, nbr = _csr(adj, n)
    iters = 20 * n if iterations is None else iterations
    best_bits, best = None, -1
    for r in range(max(1, budget)):
        rs = (seed * 1_000_003 + r) & 0x7FFFFFFF
        _, start = _mis.greedy_min_degree(adj, n, rs)
        size, bits = _mis.iterated_local_search(adj, ptr, nbr, n, start, iters, rs)
        if size > best:
            best, best_bits = size, bits
    out = _bits_to_set(best_bits, n)
    if not is_independent(graph, out):
        raise AssertionError("heuristic produced a dependent set")
    return out


def alpha_heuristic(graph, budget: int = 1, iterations: int | None = None, seed: int = 0) -> int:
    return len(independent_set_heuristic(graph, budget, iterations, seed))


# ----------------------------------------------------------------- moments

@dataclass
class MomentStats:
    ybar: float
    xbar: float
    var_y: float
    cov_xy: float
    sample_size: int
    exact: bool
    sum_y: int | None = None
    sum_x: int | None = None


def moment_stats(state: ProcessState, sample_size: int = 4096,
                 sweep_limit: int = SWEEP_LIMIT) -> MomentStats:
    """Mean of Y and X, Var(Y), Cov(X, Y) over open pairs (population convention).

    Every open pair is visited when q <= sweep_limit; otherwise a uniform sample
    without replacement, drawn from a stream keyed on (seed, m).
    """
    q = state.q
    if q == 0:
        raise ValueError("no open pairs")
    if q <= sweep_limit:
        sy, syy, sx, sxy = K.moment_sums_all(state.n, state.adj, state.opn, state.open_list, q)
        cnt, exact = q, True
    else:
        rng = np.random.default_rng([state.seed & MASK64, state.m, 0x6D6F6D])
        k = min(sample_size, q)
        idx = np.sort(rng.choice(q, size=k, replace=False)).astype(np.int64)
        sy, syy, sx, sxy = K.moment_sums(state.n, state.adj, state.opn, state.open_list, idx)
        cnt, exact = k, False
    ybar = sy / cnt
    xbar = sx / cnt
    var_y = max(syy / cnt - ybar * ybar, 0.0)
    cov = sxy / cnt - xbar * ybar
    return MomentStats(ybar, xbar, var_y, cov, cnt, exact,
                       int(sy) if exact else None, int(sx) if exact else None)


def open_triangle_count(state: ProcessState) -> int:
    O = unpack_rows(state.opn, state.n).astype(np.float64)
    return int(round(float(np.sum((O @ O) * O)))) // 6


# ------------------------------------------------------------- set profiles

@dataclass
class SetProfile:
    S: list[int]
    s: int
    delta_exp: float
    J: list[int]
    a: list[int]
    o_S: int
    o_N: int
    a_threshold: float
    a_prime_threshold: float


def set_profile(state: ProcessState, S, delta_exp: float = 0.1, family=None,
                eps: float = 0.1) -> SetProfile:
    """Heavy vertices J(S, δ), their counts a_j, and open-pair counts inside S.

    ``family`` defaults to the neighbourhoods N(v) ∩ S of the vertices of J.
    """
    n = state.n
    S = sorted(set(int(v) for v in S))
    if any(not 0 <= v < n for v in S):
        raise ValueError("S must be a subset of the vertex set")
    A = unpack_rows(state.adj, n)
    O = unpack_rows(state.opn, n)
    mask = np.zeros(n, dtype=bool)
    mask[S] = True
    counts = A[:, mask].sum(axis=1)
    thr = n ** delta_exp
    heavy = [int(v) for v in np.nonzero(counts >= thr)[0]]
    heavy.sort(key=lambda v: (-counts[v], v))
    a = [int(counts[v]) for v in heavy]
    inside = np.triu(O & mask[:, None] & mask[None, :], 1)
    o_S = int(inside.sum())
    if family is None:
        family = [np.nonzero(A[v] & mask)[0] for v in heavy]
    covered = np.zeros((n, n), dtype=bool)
    for member in family:
        idx = np.asarray(sorted(set(int(x) for x in member)), dtype=np.int64)
        if len(idx):
            covered[np.ix_(idx, idx)] = True
    o_N = int((inside & ~covered).sum())
    t = state.m / n ** 1.5
    s = len(S)
    pairs = s * (s - 1) / 2
    decay = math.exp(-4 * t * t)
    return SetProfile(S, s, delta_exp, heavy, a, o_S, o_N,
                      (1 - eps) * pairs * decay,
                      (1 - eps) * (pairs - 2 * state.m ** 2 / n ** 2) * decay)


# ---------------------------------------------------------------- witnesses

@dataclass
class WitnessCertificate:
    n: int
    seed: int
    edges: list[list[int]]
    alpha_kind: str
    alpha_value: int
    max_degree: int
    ratios: dict = field(default_factory=dict)
    claim: str | None = None
    independent_set: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        d = asdict(self)
        if d["claim"] is None:
            del d["claim"]
        return json.dumps(d, separators=(",", ":"))


def ramsey_witness(config: RunConfig, guard: int = EXACT_GUARD, node_limit: int = 5_000_000,
                   heuristic_budget: int = 4) -> WitnessCertificate:
    """Run to completion and certify α on the re-verified maximal triangle-free graph.

    Only a finished exact search yields the R(3, α+1) > n claim; otherwise the
    certificate carries a labelled lower bound.
    """
    state = new_state(RunConfig(n=config.n, seed=config.seed))
    advance(state, config.n * (config.n - 1) // 2)
    A = unpack_rows(state.adj, state.n)
    if state.q != 0 or not is_maximal_triangle_free(A):
        raise AssertionError("final graph failed maximal triangle-free verification")
    kind = "heuristic_lower_bound"
    iset = None
    if state.n <= guard:
        try:
            iset = max_independent_set(state, guard, node_limit)
            kind = "exact"
        except SolverBudgetExceeded:
            iset = None
    if iset is None:
        iset = independent_set_heuristic(state, budget=heuristic_budget, seed=config.seed)
    if not is_independent(state, iset):
        raise AssertionError("certificate set is not independent")
    n = state.n
    scale = math.sqrt(n * math.log(n)) if n > 1 else 1.0
    dmax = max_degree_stats(state).max
    ratios = {
        "alpha_over_sqrt_nlogn": len(iset) / scale,
        "maxdeg_over_sqrt_nlogn": dmax / scale,
        "edges_over_n32_sqrtlogn": state.m / (n ** 1.5 * math.sqrt(math.log(n))),
    }
    claim = f"R(3, {len(iset) + 1}) > {n}" if kind == "exact" else None
    return WitnessCertificate(n, int(config.seed), state.edges().tolist(), kind, len(iset), dmax,
                              ratios, claim, iset)
