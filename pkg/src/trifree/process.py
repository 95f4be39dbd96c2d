"""The triangle-free process: state, single steps, runs, and on-demand counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from . import _kernels as K
from .rng import MASK64, splitmix64_next

Instrumentation = Literal["light", "full"]
MAX_N = 46340  # pair codes u*n+v must fit in int32
SNAPSHOT_VERSION = 1


class ProcessComplete(Exception):
    """Raised by step() when no open pair remains."""


@dataclass(frozen=True)
class RunConfig:
    """What to simulate and when to stop.

    Exactly one of ``max_steps`` / ``until_t`` may be set; neither means
    run to completion.
    """

    n: int
    seed: int = 0
    max_steps: int | None = None
    until_t: float | None = None
    instrumentation: Instrumentation = "light"
    record_every: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.n > MAX_N:
            raise ValueError(f"n must be at most {MAX_N}, got {self.n}")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.max_steps is not None and self.until_t is not None:
            raise ValueError("give at most one of max_steps and until_t")
        if self.instrumentation not in ("light", "full"):
            raise ValueError(f"unknown instrumentation level {self.instrumentation!r}")

    @property
    def stop_m(self) -> int:
        """Step count at which the run stops (if the process lasts that long)."""
        if self.max_steps is not None:
            return int(self.max_steps)
        if self.until_t is not None:
            return int(np.ceil(self.until_t * self.n ** 1.5 - 1e-9))
        return self.n * (self.n - 1) // 2

    @property
    def every(self) -> int:
        return self.record_every if self.record_every is not None else self.n


@dataclass
class StepOutcome:
    chosen: tuple[int, int]
    closed: list[tuple[int, int]]
    y_of_chosen: int
    delta_ybb: int | None = None
    x_of_chosen: int | None = None
    sum_y_closed: int | None = None


@dataclass
class ProcessState:
    n: int
    seed: int
    instrumentation: Instrumentation
    adj: np.ndarray
    opn: np.ndarray
    open_list: np.ndarray
    pos: np.ndarray
    ctr: np.ndarray
    hist: np.ndarray
    y: np.ndarray
    dead: np.ndarray
    base: np.uint64
    _closed_buf: np.ndarray = field(repr=False)
    _info: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return int(self.ctr[K.M])

    @property
    def q(self) -> int:
        return int(self.ctr[K.Q])

    @property
    def full(self) -> bool:
        return self.instrumentation == "full"

    @property
    def ybb(self) -> int | None:
        return int(self.ctr[K.YBB]) if self.full else None

    @property
    def history(self) -> list[tuple[int, int, int]]:
        """Added edges as (u, v, step), step counted from 1."""
        h = self.hist[: self.m]
        return [(int(a), int(b), i + 1) for i, (a, b) in enumerate(h)]

    def edges(self) -> np.ndarray:
        """Edges in addition order as an (m, 2) int array."""
        return self.hist[: self.m].astype(np.int64)

    def open_pairs(self) -> list[tuple[int, int]]:
        codes = self.open_list[: self.q].astype(np.int64)
        return [(int(c // self.n), int(c % self.n)) for c in codes]

    @property
    def y_counters(self) -> dict[tuple[int, int], int] | None:
        if not self.full:
            return None
        return {p: int(self.y[K.tri(p[0], p[1], self.n)]) for p in self.open_pairs()}

    def _ensure_capacity(self, extra: int) -> None:
        need = self.m + extra
        cap = self.hist.shape[0]
        if need <= cap:
            return
        new_cap = min(max(need, 2 * cap), self.n * (self.n - 1) // 2)
        h = np.zeros((new_cap, 2), dtype=np.int32)
        h[: self.m] = self.hist[: self.m]
        self.hist = h


def _estimate_bytes(n: int, full: bool) -> int:
    npairs = n * (n - 1) // 2
    W = (n + 63) // 64
    b = 8 * npairs + 2 * 8 * n * W
    if full:
        b += 5 * npairs
    return b


def new_state(config: RunConfig) -> ProcessState:
    """Empty graph on config.n vertices with every pair open."""
    n = config.n
    full = config.instrumentation == "full"
    need = _estimate_bytes(n, full)
    try:
        import os

        avail = os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_AVPHYS_PAGES")
    except (ValueError, OSError, AttributeError):
        avail = None
    if avail is not None and need > avail:
        raise MemoryError(f"n={n} needs about {need / 2**30:.1f} GiB, {avail / 2**30:.1f} GiB available")
    W = (n + 63) // 64
    npairs = n * (n - 1) // 2
    adj = np.zeros((n, W), dtype=np.uint64)
    opn = np.zeros((n, W), dtype=np.uint64)
    open_list = np.empty(npairs, dtype=np.int32)
    pos = np.empty(npairs, dtype=np.int32)
    K.init_open(n, opn, open_list, pos)
    ctr = np.zeros(3, dtype=np.int64)
    ctr[K.Q] = npairs
    _, base = splitmix64_next(config.seed & MASK64)
    return ProcessState(
        n=n,
        seed=int(config.seed),
        instrumentation=config.instrumentation,
        adj=adj,
        opn=opn,
        open_list=open_list,
        pos=pos,
        ctr=ctr,
        hist=np.zeros((min(max(1024, 4 * n), npairs), 2), dtype=np.int32),
        y=np.zeros(npairs if full else 0, dtype=np.int32),
        dead=np.zeros(npairs if full else 0, dtype=np.uint8),
        base=np.uint64(base),
        _closed_buf=np.zeros((2 * n, 2), dtype=np.int64),
        _info=np.zeros(6, dtype=np.int64),
    )


def _call_step(state: ProcessState, fu: int, fv: int) -> int:
    state._ensure_capacity(1)
    return K.core_step(
        state.n, state.adj, state.opn, state.open_list, state.pos, state.ctr, state.hist,
        state.base, state.full, state.y, state.dead, state._closed_buf, state._info, fu, fv,
    )


def _outcome(state: ProcessState) -> StepOutcome:
    info = state._info
    nc = int(info[K.I_NCLOSED])
    closed = [(int(a), int(b)) for a, b in state._closed_buf[:nc]]
    closed = [(a, b) if a < b else (b, a) for a, b in closed]
    out = StepOutcome(chosen=(int(info[K.I_U]), int(info[K.I_V])), closed=closed, y_of_chosen=nc)
    if state.full:
        out.delta_ybb = int(info[K.I_DYBB])
        out.x_of_chosen = int(info[K.I_XE])
        out.sum_y_closed = int(info[K.I_SUMYF])
    return out


def step(state: ProcessState) -> StepOutcome:
    """Add one uniformly chosen open pair as an edge."""
    if _call_step(state, -1, -1) == 1:
        raise ProcessComplete(f"no open pairs remain at m={state.m}")
    return _outcome(state)


def add_edge(state: ProcessState, u: int, v: int) -> StepOutcome:
    """Add a specific open pair (used for replay and hand-built states)."""
    r = _call_step(state, u, v)
    if r == 1:
        raise ProcessComplete(f"no open pairs remain at m={state.m}")
    if r == 2:
        raise ValueError(f"pair ({u}, {v}) is not open")
    return _outcome(state)


def advance(state: ProcessState, stop_m: int) -> int:
    """Step until m = stop_m or completion; returns steps taken."""
    total = 0
    while state.m < stop_m and state.q > 0:
        state._ensure_capacity(min(stop_m - state.m, max(state.hist.shape[0], 1)))
        done = K.run_steps(
            state.n, state.adj, state.opn, state.open_list, state.pos, state.ctr, state.hist,
            state.base, state.full, state.y, state.dead, state._closed_buf, state._info, stop_m,
        )
        total += done
        if done == 0:
            break
    return total


def run(state: ProcessState, config: RunConfig, params=None, sample_size: int = 4096):
    """Advance to the stop condition, sampling a RunRecord every config.every steps.

    Returns (state, records).  A final record is always taken at the stop point.
    """
    from .trajectory import Params, sample_record

    if params is None:
        params = Params(n=state.n)
    records = []
    stop_m = config.stop_m
    every = config.every
    if state.m % every == 0:
        records.append(sample_record(state, params, sample_size))
    while state.m < stop_m and state.q > 0:
        target = min(stop_m, (state.m // every + 1) * every)
        advance(state, target)
        if state.m % every == 0 or state.q == 0 or state.m >= stop_m:
            if not records or records[-1].m != state.m:
                records.append(sample_record(state, params, sample_size))
    if not records or records[-1].m != state.m:
        records.append(sample_record(state, params, sample_size))
    return state, records


# ------------------------------------------------------------- on-demand counts

def _check_pair(state: ProcessState, e) -> tuple[int, int]:
    u, v = int(e[0]), int(e[1])
    if u == v or not (0 <= u < state.n and 0 <= v < state.n):
        raise ValueError(f"not a pair of distinct vertices of [{state.n}]: {e}")
    return u, v


def _and_pop(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.bitwise_count(a & b).sum())


def is_edge(state: ProcessState, u: int, v: int) -> bool:
    return bool((int(state.adj[u, v >> 6]) >> (v & 63)) & 1)


def is_open(state: ProcessState, u: int, v: int) -> bool:
    return bool((int(state.opn[u, v >> 6]) >> (v & 63)) & 1)


def y_count(state: ProcessState, e) -> int:
    """Pairs {u,w} open with {v,w} an edge, or the mirror; defined for any pair."""
    u, v = _check_pair(state, e)
    return _and_pop(state.opn[u], state.adj[v]) + _and_pop(state.opn[v], state.adj[u])


def x_count(state: ProcessState, e, split: bool = False):
    """X-neighbour count (two per open triangle on e); split=True gives (X^L, X^R)."""
    u, v = _check_pair(state, e)
    if not is_open(state, u, v):
        raise ValueError(f"pair {e} is not open")
    tri_count = _and_pop(state.opn[u], state.opn[v])
    return (tri_count, tri_count) if split else 2 * tri_count


def z_count(state: ProcessState, e) -> int:
    u, v = _check_pair(state, e)
    return _and_pop(state.adj[u], state.adj[v])


def degree(state: ProcessState, v: int) -> int:
    return int(np.bitwise_count(state.adj[v]).sum())


def open_degree(state: ProcessState, v: int) -> int:
    return int(np.bitwise_count(state.opn[v]).sum())


def degrees(state: ProcessState) -> np.ndarray:
    return K.row_counts(state.adj, state.n)


def edge_count(state: ProcessState) -> int:
    return state.m


# ------------------------------------------------------------------ oracle

def unpack_rows(rows: np.ndarray, n: int) -> np.ndarray:
    """Bit rows -> dense boolean (n, n) matrix."""
    b = np.unpackbits(rows.view(np.uint8), axis=1, bitorder="little")
    return b[:, :n].astype(bool)


def pack_rows(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    W = (n + 63) // 64
    padded = np.zeros((n, W * 64), dtype=np.uint8)
    padded[:, :n] = mat
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).reshape(n, W)


def _tri_vec(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    u = u.astype(np.int64)
    return u * (2 * n - u - 1) // 2 + (v.astype(np.int64) - u - 1)


@dataclass
class OracleStats:
    adjacency: np.ndarray  # dense bool (n, n)
    openness: np.ndarray  # dense bool (n, n)
    q: int
    pairs: np.ndarray  # (q, 2) open pairs, u < v, lexicographic
    y_values: np.ndarray  # Y_e aligned with pairs
    ybb: int
    xbb: int
    open_triangles: int
    ygraph_edges: int

    @property
    def y(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(c) for (a, b), c in zip(self.pairs, self.y_values)}


def recompute_oracle(state_or_adj) -> OracleStats:
    """Brute-force statistics from the adjacency matrix alone."""
    if isinstance(state_or_adj, ProcessState):
        A = unpack_rows(state_or_adj.adj, state_or_adj.n)
    else:
        A = np.asarray(state_or_adj, dtype=bool)
    # float matmuls are exact here (entries < 2^53) and go through BLAS
    Af = A.astype(np.float64)
    common = Af @ Af
    O = ~A & (common == 0)
    np.fill_diagonal(O, False)
    Of = O.astype(np.float64)
    OA = Of @ Af
    Ymat = OA + OA.T
    OO = Of @ Of
    iu, iv = np.nonzero(np.triu(O, 1))
    yv = Ymat[iu, iv].astype(np.int64)
    xbb = int(2 * OO[iu, iv].sum())
    open_tri = int(round(float(np.sum(OO * Of)))) // 6
    eu, ev = np.nonzero(np.triu(A, 1))
    yg_edges = int(OO[eu, ev].sum())
    return OracleStats(A, O, len(iu), np.stack([iu, iv], axis=1), yv, int(yv.sum()), xbb,
                       open_tri, yg_edges)


def oracle_mismatches(state: ProcessState, orc: OracleStats | None = None) -> list[str]:
    """Names of incremental quantities that disagree with the oracle (empty if none)."""
    orc = recompute_oracle(state) if orc is None else orc
    n = state.n
    bad = []
    if not np.array_equal(unpack_rows(state.opn, n), orc.openness):
        bad.append("openness")
    if state.q != orc.q:
        bad.append("q")
    codes = state.open_list[: state.q].astype(np.int64)
    a, b = codes // n, codes % n
    expect = orc.pairs[:, 0].astype(np.int64) * n + orc.pairs[:, 1]
    if len(codes) != len(expect) or not np.array_equal(np.sort(codes), expect) or np.any(a >= b):
        bad.append("open_list")
    elif not np.array_equal(state.pos[_tri_vec(a, b, n)], np.arange(len(codes))):
        bad.append("open_index")
    if state.full:
        want = np.zeros_like(state.y)
        want[_tri_vec(orc.pairs[:, 0], orc.pairs[:, 1], n)] = orc.y_values
        if not np.array_equal(state.y, want):
            bad.append("y_counters")
        if state.ybb != orc.ybb:
            bad.append("ybb")
    return bad


def is_maximal_triangle_free(adj: np.ndarray) -> bool:
    """Dense boolean adjacency: no triangle, and every non-edge has a common neighbour."""
    A = np.asarray(adj, dtype=bool)
    Ai = A.astype(np.int64)
    common = Ai @ Ai
    if np.any(common[A] > 0):
        return False
    nonedge = ~A
    np.fill_diagonal(nonedge, False)
    return bool(np.all(common[nonedge] > 0))


# ------------------------------------------------------------- persistence

def snapshot(state: ProcessState) -> dict:
    return {
        "format_version": SNAPSHOT_VERSION,
        "n": state.n,
        "seed": state.seed,
        "m": state.m,
        "edges": state.edges().tolist(),
    }


def save_snapshot(state: ProcessState, path: str | Path, append: bool = True) -> None:
    with open(path, "a" if append else "w") as fh:
        fh.write(json.dumps(snapshot(state), separators=(",", ":")) + "\n")


def restore(snap: dict, instrumentation: Instrumentation = "light") -> ProcessState:
    """Rebuild a state by replaying the snapshot's edges; later draws key on (seed, m)."""
    if snap.get("format_version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {snap.get('format_version')}")
    state = new_state(RunConfig(n=snap["n"], seed=snap["seed"], instrumentation=instrumentation))
    edges = np.asarray(snap["edges"], dtype=np.int64).reshape(-1, 2)
    if len(edges) != snap["m"]:
        raise ValueError("snapshot edge list length does not match m")
    state._ensure_capacity(len(edges))
    bad = K.replay(
        state.n, state.adj, state.opn, state.open_list, state.pos, state.ctr, state.hist,
        state.base, state.full, state.y, state.dead, state._closed_buf, state._info, edges,
    )
    if bad >= 0:
        raise ValueError(f"snapshot edge {bad} {edges[bad].tolist()} is not open when replayed")
    return state


def load_snapshot(path: str | Path, index: int = -1, instrumentation: Instrumentation = "light") -> ProcessState:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"no snapshot in {path}")
    return restore(json.loads(lines[index]), instrumentation)


def export_graph(state: ProcessState, path: str | Path) -> None:
    """Text export: first line 'n m', then one 'u v' line per edge in addition order."""
    lines = [f"{state.n} {state.m}"] + [f"{a} {b}" for a, b in state.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path: str | Path) -> tuple[int, np.ndarray]:
    rows = Path(path).read_text().split("\n")
    n, m = map(int, rows[0].split())
    edges = np.array([list(map(int, r.split())) for r in rows[1 : 1 + m]], dtype=np.int64).reshape(-1, 2)
    return n, edges


def dense_adjacency(state: ProcessState) -> np.ndarray:
    return unpack_rows(state.adj, state.n)
