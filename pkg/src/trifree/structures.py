"""Graph structures (vertices, edges, open edges) anchored at a vertex set.

Times are compared through rho = t^2 / log n, an exact rational, so every
"minimal" and "maximal" choice below is decided without floating point.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .trajectory import Params, time_map

MAX_FREE = 16


class StructureParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class StructureTooLarge(ValueError):
    pass


# -------------------------------------------------------------------- times

@dataclass(frozen=True)
class RhoTime:
    """Squared time over log n: 'zero', a positive rational, or 'infinite'."""

    kind: str
    value: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("zero", "finite", "infinite"):
            raise ValueError(f"bad kind {self.kind}")
        if self.kind == "finite" and self.value <= 0:
            raise ValueError("finite rho must be positive")

    @staticmethod
    def of(v: int, e: int, o: int) -> "RhoTime":
        """rho from the free-vertex count v and the edge counts e (edges) and o (open pairs)."""
        if e >= 2 * v:
            return ZERO
        if o == 0:
            return INFINITE
        return RhoTime("finite", Fraction(2 * v - e, 8 * o))

    def _key(self):
        return ({"zero": 0, "finite": 1, "infinite": 2}[self.kind], self.value)

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __gt__(self, other):
        return self._key() > other._key()

    def __ge__(self, other):
        return self._key() >= other._key()

    def t(self, n: int) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "infinite":
            return math.inf
        return math.sqrt(float(self.value) * math.log(n))

    def __str__(self):
        return {"zero": "0", "infinite": "inf"}.get(self.kind, str(self.value))


ZERO = RhoTime("zero")
INFINITE = RhoTime("infinite")


# --------------------------------------------------------------- structures

def _pair(a: str, b: str) -> frozenset:
    if a == b:
        raise ValueError(f"loop at {a}")
    return frozenset((a, b))


@dataclass(frozen=True)
class GraphStructure:
    vertices: tuple
    edges: frozenset
    open_edges: frozenset

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        if self.edges & self.open_edges:
            raise ValueError("a pair cannot be both an edge and an open edge")
        for p in self.edges | self.open_edges:
            if len(p) != 2 or not p <= vs:
                raise ValueError(f"pair {sorted(p)} is not a pair of structure vertices")

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def o(self) -> int:
        return len(self.open_edges)

    @property
    def v(self) -> int:
        return len(self.vertices)


def is_permissible(F: GraphStructure) -> bool:
    """Every triangle of E ∪ O has at least two open sides."""
    pairs = F.edges | F.open_edges
    for a, b, c in combinations(F.vertices, 3):
        sides = [_pair(a, b), _pair(a, c), _pair(b, c)]
        if all(s in pairs for s in sides) and sum(s in F.open_edges for s in sides) < 2:
            return False
    return True


@dataclass(frozen=True)
class AnchoredPair:
    """A structure with an anchor set; pairs inside the anchor are dropped on construction."""

    structure: GraphStructure
    anchor: frozenset

    def __init__(self, structure: GraphStructure, anchor):
        anchor = frozenset(anchor)
        if not anchor <= set(structure.vertices):
            raise ValueError("anchor must be a subset of the vertices")
        E = frozenset(p for p in structure.edges if not p <= anchor)
        O = frozenset(p for p in structure.open_edges if not p <= anchor)
        object.__setattr__(self, "structure", GraphStructure(structure.vertices, E, O))
        object.__setattr__(self, "anchor", anchor)

    @classmethod
    def build(cls, vertices, anchor, edges=(), open_edges=()) -> "AnchoredPair":
        E = frozenset(_pair(*p) for p in edges)
        O = frozenset(_pair(*p) for p in open_edges)
        return cls(GraphStructure(tuple(vertices), E, O), anchor)

    @property
    def vertices(self) -> tuple:
        return self.structure.vertices

    @property
    def free(self) -> list:
        return [x for x in self.vertices if x not in self.anchor]

    @property
    def v_a(self) -> int:
        return len(self.vertices) - len(self.anchor)

    @property
    def e(self) -> int:
        return self.structure.e

    @property
    def o(self) -> int:
        return self.structure.o

    def induced(self, keep, anchor=None) -> "AnchoredPair":
        """Sub-structure induced on ``keep`` (which must contain the anchor)."""
        keep = frozenset(keep)
        anchor = self.anchor if anchor is None else frozenset(anchor)
        if not anchor <= keep:
            raise ValueError("induced vertex set must contain the anchor")
        vs = tuple(x for x in self.vertices if x in keep)
        E = frozenset(p for p in self.structure.edges if p <= keep)
        O = frozenset(p for p in self.structure.open_edges if p <= keep)
        return AnchoredPair(GraphStructure(vs, E, O), anchor)

    def key(self) -> tuple:
        """Canonical comparison key (labelled, order-free)."""
        return (frozenset(self.vertices), self.anchor, self.structure.edges, self.structure.open_edges)

    def same_as(self, other: "AnchoredPair") -> bool:
        return self.key() == other.key()

    def to_text(self) -> str:
        def fmt(pairs):
            order = {x: i for i, x in enumerate(self.vertices)}
            items = sorted((tuple(sorted(p, key=order.get)) for p in pairs), key=lambda t: (order[t[0]], order[t[1]]))
            return " ".join(f"{a}-{b}" for a, b in items)

        anchor = [x for x in self.vertices if x in self.anchor]
        return "\n".join([
            "v: " + " ".join(self.vertices),
            "A: " + " ".join(anchor),
            ("E: " + fmt(self.structure.edges)).rstrip(),
            ("O: " + fmt(self.structure.open_edges)).rstrip(),
        ])


_NAME = re.compile(r"[A-Za-z0-9_']+")


def parse_structure(text: str) -> AnchoredPair:
    """Parse 'v:', 'A:', 'E:', 'O:' declarations (newline or ';' separated, '#' comments)."""
    decls = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        col0 = 0
        for chunk in line.split(";"):
            stripped = chunk.strip()
            if stripped:
                decls.append((ln, col0 + (len(chunk) - len(chunk.lstrip())) + 1, stripped))
            col0 += len(chunk) + 1
    expected = ["v", "A", "E", "O"]
    if len(decls) != 4:
        ln, col = (decls[-1][0], decls[-1][1]) if decls else (1, 1)
        raise StructureParseError(f"expected 4 declarations (v, A, E, O), found {len(decls)}", ln, col)
    parsed = {}
    for (ln, col, body), tag in zip(decls, expected):
        head, sep, rest = body.partition(":")
        if not sep or head.strip() != tag:
            raise StructureParseError(f"expected '{tag}:'", ln, col)
        items = [tok for tok in re.split(r"[\s,]+", rest.strip()) if tok]
        offset = col + len(head) + 1
        if tag in ("v", "A"):
            for tok in items:
                if not _NAME.fullmatch(tok):
                    raise StructureParseError(f"bad vertex name {tok!r}", ln, offset + rest.find(tok))
            parsed[tag] = items
        else:
            pairs = []
            for tok in items:
                ends = tok.split("-")
                if len(ends) != 2 or not all(_NAME.fullmatch(x) for x in ends):
                    raise StructureParseError(f"bad pair {tok!r}, expected a-b", ln, offset + rest.find(tok))
                pairs.append((tuple(ends), ln, offset + rest.find(tok)))
            parsed[tag] = pairs
    names = parsed["v"]
    if len(set(names)) != len(names):
        raise StructureParseError("duplicate vertex name", decls[0][0], decls[0][1])
    known = set(names)
    for x in parsed["A"]:
        if x not in known:
            raise StructureParseError(f"anchor vertex {x!r} not declared", decls[1][0], decls[1][1])
    seen = {}
    for tag in ("E", "O"):
        for (a, b), ln, col in parsed[tag]:
            for x in (a, b):
                if x not in known:
                    raise StructureParseError(f"vertex {x!r} not declared", ln, col)
            if a == b:
                raise StructureParseError(f"loop {a}-{b}", ln, col)
            p = frozenset((a, b))
            if p in seen:
                kind = "both E and O" if seen[p] != tag else f"twice in {tag}"
                raise StructureParseError(f"pair {a}-{b} listed {kind}", ln, col)
            seen[p] = tag
    E = [pair for pair, _, _ in parsed["E"]]
    O = [pair for pair, _, _ in parsed["O"]]
    return AnchoredPair.build(names, parsed["A"], E, O)


# ------------------------------------------------------- sub-structure tables

@dataclass
class _Table:
    free: list
    v: np.ndarray
    e: np.ndarray
    o: np.ndarray

    @property
    def full(self) -> int:
        return (1 << len(self.free)) - 1

    def names(self, mask: int) -> frozenset:
        return frozenset(x for i, x in enumerate(self.free) if mask >> i & 1)


def _table(pair: AnchoredPair, guard: int = MAX_FREE) -> _Table:
    free = pair.free
    k = len(free)
    if k > guard:
        raise StructureTooLarge(f"{k} non-anchor vertices exceeds the enumeration guard {guard}")
    bit = {x: 1 << i for i, x in enumerate(free)}
    masks = np.arange(1 << k, dtype=np.int64)
    v = np.zeros(1 << k, dtype=np.int64)
    for i in range(k):
        v += (masks >> i) & 1

    def count(pairs):
        c = np.zeros(1 << k, dtype=np.int64)
        for p in pairs:
            need = sum(bit.get(x, 0) for x in p)
            c += (masks & need) == need
        return c

    return _Table(free, v, count(pair.structure.edges), count(pair.structure.open_edges))


def _rho(tab: _Table, mask: int, base: int = 0) -> RhoTime:
    return RhoTime.of(int(tab.v[mask] - tab.v[base]), int(tab.e[mask] - tab.e[base]),
                      int(tab.o[mask] - tab.o[base]))


def rho_star(pair: AnchoredPair) -> RhoTime:
    return RhoTime.of(pair.v_a, pair.e, pair.o)


def t_star_struct(pair: AnchoredPair, n: int) -> float:
    return rho_star(pair).t(n)


def _proper_supersets(tab: _Table, base: int = 0):
    for mask in range(tab.full + 1):
        if mask & base == base and mask != base:
            yield mask


def min_rho(pair: AnchoredPair) -> RhoTime:
    """Uncapped min of rho over A ⊊ H ⊆ F (infinite when A = F)."""
    tab = _table(pair)
    return min((_rho(tab, m) for m in _proper_supersets(tab)), default=INFINITE)


def tracking_time(pair: AnchoredPair, params: Params) -> tuple[RhoTime, float]:
    """(uncapped rho minimum, realized time capped at t*)."""
    rho = min_rho(pair)
    return rho, min(rho.t(params.n), params.t_star)


# ------------------------------------------------------------ idealized counts

def log_tilde_n(pair: AnchoredPair, params: Params, m: float) -> float:
    t = time_map(params, m)
    n = params.n
    out = -4 * t * t * pair.o + pair.v_a * math.log(n)
    if pair.e:
        if t == 0:
            return -math.inf
        out += pair.e * (math.log(2 * t) - 0.5 * math.log(n))
    return out


def tilde_n(pair: AnchoredPair, params: Params, m: float) -> float:
    """e^{-4t^2 o} (2t/√n)^e n^{v_A}."""
    return math.exp(log_tilde_n(pair, params, m))


# --------------------------------------------------------------- weights

@dataclass
class StructureWeights:
    delta_base: float
    delta: float
    delta_minus_v: float
    gamma: float
    c: Fraction | None
    log_delta: float
    log_delta_minus_v: float


def _power(base: float, exp: float) -> float:
    try:
        return base ** exp
    except OverflowError:
        return math.inf


def c_value(pair: AnchoredPair) -> Fraction:
    """max(2, max over A ⊊ H ⊆ F of 2 o(H) / (2 v_A(H) - e(H))); needs t_A(F) > 0."""
    tab = _table(pair)
    best = Fraction(2)
    for mask in _proper_supersets(tab):
        den = int(2 * tab.v[mask] - tab.e[mask])
        if den <= 0:
            raise ValueError("c is undefined when the tracking time is zero")
        best = max(best, Fraction(2 * int(tab.o[mask]), den))
    return best


def delta_value(v_a: int, e: int, o: int, big_c: float) -> float:
    return _power(big_c ** 3 * v_a * v_a + 2 * e + o, big_c)


def weights(pair: AnchoredPair, params: Params) -> StructureWeights:
    C = params.big_c
    base = C ** 3 * pair.v_a ** 2 + 2 * pair.e + pair.o
    delta = _power(base, C)
    if pair.v_a >= 1:
        dmv = _power(base - C, C)
        log_dmv = C * math.log(base - C)
    else:
        dmv, log_dmv = 0.0, -math.inf
    c = c_value(pair) if min_rho(pair) > ZERO else None
    log_delta = C * math.log(base) if base > 0 else -math.inf
    return StructureWeights(base, delta, dmv, delta - pair.e - 2, c, log_delta, log_dmv)


def delta_split(F: AnchoredPair, H, params: Params) -> float:
    """Δ(F, H, A) = Δ(F, H) + Δ(H, A) for A ⊆ H ⊆ V(F)."""
    H = frozenset(H)
    upper = F.induced(F.vertices, anchor=H)
    lower = F.induced(H)
    C = params.big_c
    return (delta_value(upper.v_a, upper.e, upper.o, C)
            + delta_value(lower.v_a, lower.e, lower.o, C))


def log_g_fa(pair: AnchoredPair, params: Params, t: float) -> float:
    w = weights(pair, params)
    if w.c is None:
        raise ValueError("g is undefined when the tracking time is zero")
    ln = params.log_n
    return float(w.c) * t * t - 0.25 * ln + w.gamma * math.log(ln)


def g_fa(pair: AnchoredPair, params: Params, t: float) -> float:
    """e^{c t^2} n^{-1/4} (log n)^γ."""
    return _exp(log_g_fa(pair, params, t))


def log_f_fa(pair: AnchoredPair, params: Params, t: float) -> float:
    w = weights(pair, params)
    C, ln = params.big_c, params.log_n
    return C * (pair.o + 1) * (t * t + 1) - 0.25 * ln + (w.delta - math.sqrt(w.delta)) * math.log(ln)


def f_fa(pair: AnchoredPair, params: Params, t: float) -> float:
    """e^{C(o+1)(t^2+1)} n^{-1/4} (log n)^{Δ - √Δ}."""
    return _exp(log_f_fa(pair, params, t))


def log_death_line(pair: AnchoredPair, params: Params, m: float) -> float:
    t = time_map(params, m)
    _, ta = tracking_time(pair, params)
    w = weights(pair, params)
    lln = math.log(params.log_n)
    first = -pair.o * (t * t - ta * ta) + w.delta * lln
    second = w.delta_minus_v * lln if pair.v_a >= 1 else -math.inf
    return max(first, second)


def death_line(pair: AnchoredPair, params: Params, m: float) -> float:
    """max{e^{-o(t^2 - t_A^2)} (log n)^Δ, (log n)^{Δ(F-v, A)}}."""
    return _exp(log_death_line(pair, params, m))


def _exp(x: float) -> float:
    if x == math.inf:
        return math.inf
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------- building sequences

@dataclass
class BuildingSequenceResult:
    chain: list  # list of frozensets of vertex names, A ⊆ H_0 ⊊ ... ⊊ H_ℓ = V(F)
    times: list  # RhoTime per chain member; times[0] is ZERO

    @property
    def length(self) -> int:
        return len(self.chain) - 1


def _union_of_best(masks, key):
    best = min(key(m) for m in masks)
    union = 0
    for m in masks:
        if key(m) == best:
            union |= m
    return union, best


def building_sequence(pair: AnchoredPair, guard: int = MAX_FREE) -> BuildingSequenceResult:
    tab = _table(pair, guard)
    cands = [m for m in range(tab.full + 1) if tab.e[m] >= 2 * tab.v[m]]
    h0, best = _union_of_best(cands, lambda m: (int(2 * tab.v[m] - tab.e[m]), -int(tab.o[m])))
    if (int(2 * tab.v[h0] - tab.e[h0]), -int(tab.o[h0])) != best:
        raise AssertionError("union of optimizers is not optimal")
    chain = [h0]
    times = [ZERO]
    while chain[-1] != tab.full:
        cur = chain[-1]
        sup = list(_proper_supersets(tab, cur))
        nxt, rho = _union_of_best(sup, lambda m: _rho(tab, m, cur))
        if _rho(tab, nxt, cur) != rho:
            raise AssertionError("union of minimizers is not a minimizer")
        chain.append(nxt)
        times.append(rho)
    anchor = pair.anchor
    return BuildingSequenceResult([anchor | tab.names(m) for m in chain], times)


def is_balanced(pair: AnchoredPair) -> bool:
    tab = _table(pair)
    full = tab.full
    if full == 0:
        return True
    sups = list(_proper_supersets(tab))
    rho_f = _rho(tab, full)
    tmin = min(_rho(tab, m) for m in sups)
    if tmin > ZERO:
        return all(_rho(tab, m) >= rho_f for m in sups)
    key_f = int(tab.e[full] - 2 * tab.v[full])
    return all(int(tab.e[m] - 2 * tab.v[m]) <= key_f for m in range(full + 1))


def minimal_tracking_substructure(pair: AnchoredPair, params: Params, t: float) -> frozenset:
    """H_j of the building sequence with t_j <= t < t_{j+1}."""
    if not 0 < t < params.t_star:
        raise ValueError("t must lie in (0, t*)")
    bs = building_sequence(pair)
    j = 0
    for i, r in enumerate(bs.times):
        if r.t(params.n) <= t:
            j = i
    return bs.chain[j]


# --------------------------------------------------------------- families

@dataclass
class DerivedMember:
    pair: AnchoredPair
    case: str
    detail: tuple = field(default_factory=tuple)


def _fresh(pair: AnchoredPair, stem: str = "x") -> str:
    used = set(pair.vertices)
    i = 0
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def _with(pair, vertices=None, edges=None, open_edges=None, anchor=None) -> AnchoredPair:
    s = pair.structure
    return AnchoredPair(
        GraphStructure(tuple(vertices if vertices is not None else s.vertices),
                       frozenset(edges if edges is not None else s.edges),
                       frozenset(open_edges if open_edges is not None else s.open_edges)),
        pair.anchor if anchor is None else anchor)


def derived_families(pair: AnchoredPair, which: str) -> list[DerivedMember]:
    """Labelled variants: 'open', 'plus', 'minus' (cases a-f) or 'star'."""
    s = pair.structure
    A = pair.anchor
    free = pair.free
    order = {x: i for i, x in enumerate(pair.vertices)}

    def sorted_pair(p):
        return tuple(sorted(p, key=order.get))

    edges_sorted = sorted((sorted_pair(p) for p in s.edges), key=lambda t: (order[t[0]], order[t[1]]))
    if which == "open":
        return [DerivedMember(_with(pair, edges=s.edges - {frozenset(f)}, open_edges=s.open_edges | {frozenset(f)}),
                              "open", f) for f in edges_sorted]
    if which == "plus":
        return [DerivedMember(_with(pair, anchor=A | set(f)), "plus", f) for f in edges_sorted]
    if which == "star":
        return [mm for mm in derived_families(pair, "minus") if mm.pair.v_a < pair.v_a]
    if which != "minus":
        raise ValueError(f"unknown family {which!r}; expected open, plus, minus or star")
    out = []
    pairs = s.edges | s.open_edges
    anchor_sorted = [x for x in pair.vertices if x in A]
    # (a) a new edge from A to a free vertex that has an open neighbour in A
    for v in free:
        if not any(frozenset((a, v)) in s.open_edges for a in A):
            continue
        for a in anchor_sorted:
            f = frozenset((a, v))
            if f not in pairs:
                out.append(DerivedMember(_with(pair, edges=s.edges | {f}), "a", (a, v)))
    # (b) absorb one free vertex
    for v in free:
        out.append(DerivedMember(_with(pair, anchor=A | {v}), "b", (v,)))
    # (c) a new anchored vertex joined by an edge to a free vertex
    x = _fresh(pair)
    for v in free:
        out.append(DerivedMember(
            _with(pair, vertices=pair.vertices + (x,), edges=s.edges | {frozenset((x, v))}, anchor=A | {x}),
            "c", (x, v)))
    # (d) absorb two free vertices
    for u, v in combinations(free, 2):
        out.append(DerivedMember(_with(pair, anchor=A | {u, v}), "d", (u, v)))
    # (e) absorb one free vertex and add a new anchored vertex
    for u in free:
        out.append(DerivedMember(_with(pair, vertices=pair.vertices + (x,), anchor=A | {u, x}), "e", (u, x)))
    # (f) as (e), plus an edge from the new vertex to a vertex outside the new anchor
    for u in free:
        for w in free:
            if w == u:
                continue
            out.append(DerivedMember(
                _with(pair, vertices=pair.vertices + (x,), edges=s.edges | {frozenset((x, w))}, anchor=A | {u, x}),
                "f", (u, x, w)))
    return out


# ------------------------------------------------------------- embeddings

def _rows_as_ints(rows: np.ndarray, n: int) -> list[int]:
    b = rows.view(np.uint8)
    return [int.from_bytes(b[i].tobytes(), "little") for i in range(n)]


def faithful_structure(pair: AnchoredPair, phi: dict, state) -> GraphStructure:
    """F with the G_m edges among φ(A) imported as edges."""
    from .process import is_edge

    vals = [phi[a] for a in pair.anchor]
    if len(set(vals)) != len(vals):
        raise ValueError("phi must be injective")
    extra = set()
    for a, b in combinations(sorted(pair.anchor, key=str), 2):
        if is_edge(state, phi[a], phi[b]):
            extra.add(frozenset((a, b)))
    s = pair.structure
    return GraphStructure(s.vertices, s.edges | frozenset(extra), s.open_edges)


def is_faithful(pair: AnchoredPair, phi: dict, state) -> bool:
    return is_permissible(faithful_structure(pair, phi, state))


def count_embeddings(pair: AnchoredPair, phi: dict, state, guard: int = 8) -> int:
    """Injective maps extending φ that send E(F) to edges and O(F) to open pairs."""
    free = pair.free
    if len(free) > guard:
        raise StructureTooLarge(f"{len(free)} free vertices exceeds the embedding guard {guard}")
    if set(phi) != set(pair.anchor):
        raise ValueError("phi must be defined exactly on the anchor")
    n = state.n
    adj = _rows_as_ints(state.adj, n)
    opn = _rows_as_ints(state.opn, n)
    everything = (1 << n) - 1
    E, O = pair.structure.edges, pair.structure.open_edges
    # order free vertices so that constrained ones come first
    placed = set(pair.anchor)
    order = []
    remaining = list(free)
    while remaining:
        remaining.sort(key=lambda x: -sum(frozenset((x, y)) in E | O for y in placed))
        nxt = remaining.pop(0)
        order.append(nxt)
        placed.add(nxt)

    def cands(x, assign, used):
        c = everything & ~used
        for y, img in assign.items():
            p = frozenset((x, y))
            if p in E:
                c &= adj[img]
            elif p in O:
                c &= opn[img]
        return c

    def rec(i, assign, used):
        if i == len(order):
            return 1
        x = order[i]
        c = cands(x, assign, used)
        if i == len(order) - 1:
            return bin(c).count("1")
        total = 0
        while c:
            low = c & -c
            w = low.bit_length() - 1
            c ^= low
            assign[x] = w
            total += rec(i + 1, assign, used | low)
            del assign[x]
        return total

    # anchor pairs are hat-removed, so only injectivity is checked on φ
    used = 0
    for a in pair.anchor:
        used |= 1 << phi[a]
    if bin(used).count("1") != len(pair.anchor):
        raise ValueError("phi must be injective")
    return rec(0, dict(phi), used)


@dataclass
class TrackingReport:
    t: float
    tilde: float
    envelope: float | None
    vacuous: bool
    samples: int
    faithful: int
    ratios: list
    violations: int


def tracking_report(pair: AnchoredPair, params: Params, state, sample: int = 20,
                    seed: int = 0) -> TrackingReport:
    """N_φ(F) against Ñ_A(F) for randomly drawn faithful anchor maps."""
    rnd = random.Random(seed)
    t = time_map(params, state.m)
    nt = tilde_n(pair, params, state.m)
    rho = min_rho(pair)
    env = g_fa(pair, params, t) if rho > ZERO else None
    anchor = sorted(pair.anchor, key=str)
    ratios, faithful = [], 0
    for _ in range(sample):
        imgs = rnd.sample(range(state.n), len(anchor))
        phi = dict(zip(anchor, imgs))
        if not is_faithful(pair, phi, state):
            continue
        faithful += 1
        cnt = count_embeddings(pair, phi, state)
        ratios.append(cnt / nt if nt > 0 else math.inf)
    viol = 0
    if env is not None:
        viol = sum(1 for r in ratios if abs(r - 1) > env)
    return TrackingReport(t, nt, env, env is None or env > 1, sample, faithful, ratios, viol)
