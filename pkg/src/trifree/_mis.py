"""numba kernels for maximum independent sets on bit-row graphs."""

import numba as nb
import numpy as np

from ._kernels import ctz, popcount

_ONE = np.uint64(1)


@nb.njit(cache=True, inline="always")
def _has(bits, v):
    return (bits[v >> 6] >> np.uint64(v & 63)) & _ONE


@nb.njit(cache=True, inline="always")
def _clear(bits, v):
    bits[v >> 6] &= ~(_ONE << np.uint64(v & 63))


@nb.njit(cache=True, inline="always")
def _set(bits, v):
    bits[v >> 6] |= _ONE << np.uint64(v & 63)


@nb.njit(cache=True)
def _count(bits):
    c = 0
    for i in range(bits.shape[0]):
        c += popcount(bits[i])
    return c


@nb.njit(cache=True)
def _deg_in(adj, v, P):
    c = 0
    for i in range(P.shape[0]):
        c += popcount(adj[v, i] & P[i])
    return c


@nb.njit(cache=True)
def _reduce(adj, P, S):
    """Take every vertex of degree <= 1 in G[P] until none is left; returns vertices taken."""
    W = P.shape[0]
    taken = 0
    changed = True
    while changed:
        changed = False
        for i in range(W):
            word = P[i]
            while word:
                v = (i << 6) + ctz(word)
                word &= word - _ONE
                if not _has(P, v):
                    continue
                d = _deg_in(adj, v, P)
                if d <= 1:
                    _set(S, v)
                    taken += 1
                    _clear(P, v)
                    if d == 1:
                        for k in range(W):
                            P[k] &= ~adj[v, k]
                    changed = True
    return taken


@nb.njit(cache=True)
def _matching_bound(adj, P, scratch):
    """|P| minus a greedy matching of G[P]: an upper bound on alpha(G[P])."""
    W = P.shape[0]
    for i in range(W):
        scratch[i] = P[i]
    size = 0
    matched = 0
    for i in range(W):
        word = P[i]
        while word:
            v = (i << 6) + ctz(word)
            word &= word - _ONE
            size += 1
            if not _has(scratch, v):
                continue
            _clear(scratch, v)
            for k in range(W):
                w2 = adj[v, k] & scratch[k]
                if w2:
                    u = (k << 6) + ctz(w2)
                    _clear(scratch, u)
                    matched += 1
                    break
    return size - matched


@nb.njit(cache=True)
def _paths_cycles(adj, P, S):
    """Exact alpha of G[P] when every degree is <= 2; adds an optimal set to S."""
    W = P.shape[0]
    rest = P.copy()
    total = 0
    order = np.empty(_count(P), dtype=np.int64)
    for i in range(W):
        while rest[i]:
            start = (i << 6) + ctz(rest[i])
            # walk to one end of the path (or around the cycle)
            prev = -1
            cur = start
            is_cycle = False
            while True:
                nxt = -1
                for k in range(W):
                    word = adj[cur, k] & P[k]
                    while word:
                        w = (k << 6) + ctz(word)
                        word &= word - _ONE
                        if w != prev:
                            nxt = w
                            break
                    if nxt >= 0:
                        break
                if nxt < 0:
                    break
                if nxt == start:
                    is_cycle = True
                    break
                prev = cur
                cur = nxt
            # cur is an end (or start again for a cycle); enumerate the component
            cnt = 0
            prev = -1
            node = cur
            while True:
                order[cnt] = node
                cnt += 1
                _clear(rest, node)
                nxt = -1
                for k in range(W):
                    word = adj[node, k] & P[k] & rest[k]
                    if word:
                        w = (k << 6) + ctz(word)
                        if w != prev:
                            nxt = w
                            break
                if nxt < 0:
                    break
                prev = node
                node = nxt
            take = cnt // 2 if is_cycle else (cnt + 1) // 2
            for j in range(0, 2 * take, 2):
                _set(S, order[j])
            total += take
    return total


@nb.njit(cache=True)
def mis_branch_and_bound(adj, n, init_best, init_set, node_limit):
    """Maximum independent set by branching on a max-degree vertex.

    Returns (best size, best set bits, nodes visited, finished flag).
    """
    W = adj.shape[1]
    depth_cap = 2 * n + 4
    Pst = np.zeros((depth_cap, W), dtype=np.uint64)
    Sst = np.zeros((depth_cap, W), dtype=np.uint64)
    cst = np.zeros(depth_cap, dtype=np.int64)
    best = init_best
    best_set = init_set.copy()
    scratch = np.zeros(W, dtype=np.uint64)
    for v in range(n):
        _set(Pst[0], v)
    top = 1
    nodes = 0
    while top > 0:
        top -= 1
        P = Pst[top].copy()
        S = Sst[top].copy()
        c = cst[top]
        nodes += 1
        if node_limit > 0 and nodes > node_limit:
            return best, best_set, nodes, False
        c += _reduce(adj, P, S)
        if _count(P) == 0:
            if c > best:
                best = c
                best_set[:] = S
            continue
        if c + _matching_bound(adj, P, scratch) <= best:
            continue
        bv = -1
        bd = -1
        for i in range(W):
            word = P[i]
            while word:
                v = (i << 6) + ctz(word)
                word &= word - _ONE
                d = _deg_in(adj, v, P)
                if d > bd:
                    bd = d
                    bv = v
        if bd <= 2:
            c += _paths_cycles(adj, P, S)
            if c > best:
                best = c
                best_set[:] = S
            continue
        # exclude branch
        Pst[top] = P
        _clear(Pst[top], bv)
        Sst[top] = S
        cst[top] = c
        top += 1
        # include branch, explored first
        for k in range(W):
            Pst[top, k] = P[k] & ~adj[bv, k]
        _clear(Pst[top], bv)
        Sst[top] = S
        _set(Sst[top], bv)
        cst[top] = c + 1
        top += 1
    return best, best_set, nodes, True


@nb.njit(cache=True)
def greedy_min_degree(adj, n, seed):
    """Repeatedly take a minimum-degree vertex of the remaining graph (random tie-break)."""
    np.random.seed(seed)
    W = adj.shape[1]
    P = np.zeros(W, dtype=np.uint64)
    for v in range(n):
        _set(P, v)
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        deg[v] = _deg_in(adj, v, P)
    alive = np.ones(n, dtype=np.bool_)
    S = np.zeros(W, dtype=np.uint64)
    size = 0
    remaining = n
    while remaining > 0:
        bd = n + 1
        ties = 0
        bv = -1
        for v in range(n):
            if alive[v]:
                if deg[v] < bd:
                    bd = deg[v]
                    bv = v
                    ties = 1
                elif deg[v] == bd:
                    ties += 1
                    if np.random.randint(0, ties) == 0:
                        bv = v
        _set(S, bv)
        size += 1
        # remove N[bv]
        alive[bv] = False
        remaining -= 1
        for k in range(W):
            word = adj[bv, k]
            while word:
                w = (k << 6) + ctz(word)
                word &= word - _ONE
                if alive[w]:
                    alive[w] = False
                    remaining -= 1
                    # neighbours of w lose a degree
                    for k2 in range(W):
                        w2 = adj[w, k2]
                        while w2:
                            x = (k2 << 6) + ctz(w2)
                            w2 &= w2 - _ONE
                            deg[x] -= 1
    return size, S


@nb.njit(cache=True)
def _insert(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size):
    in_set[v] = True
    sol_pos[v] = size
    sol[size] = v
    for j in range(nbr_ptr[v], nbr_ptr[v + 1]):
        tight[nbr[j]] += 1
    return size + 1


@nb.njit(cache=True)
def _remove(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size):
    in_set[v] = False
    p = sol_pos[v]
    last = sol[size - 1]
    sol[p] = last
    sol_pos[last] = p
    sol_pos[v] = -1
    for j in range(nbr_ptr[v], nbr_ptr[v + 1]):
        tight[nbr[j]] -= 1
    return size - 1


@nb.njit(cache=True)
def _local_search(adj, nbr_ptr, nbr, in_set, tight, sol_pos, sol, size, n, cand):
    """Add free vertices and apply (1,2)-swaps until neither applies."""
    W = adj.shape[1]
    improved = True
    while improved:
        improved = False
        for v in range(n):
            if not in_set[v] and tight[v] == 0:
                size = _insert(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size)
                improved = True
        j = 0
        while j < size:
            x = sol[j]
            for k in range(W):
                cand[k] = np.uint64(0)
            cnt = 0
            for t in range(nbr_ptr[x], nbr_ptr[x + 1]):
                w = nbr[t]
                if tight[w] == 1:
                    _set(cand, w)
                    cnt += 1
            found = False
            if cnt >= 2:
                for t in range(nbr_ptr[x], nbr_ptr[x + 1]):
                    w = nbr[t]
                    if tight[w] != 1:
                        continue
                    for k in range(W):
                        rest = cand[k] & ~adj[w, k]
                        if k == (w >> 6):
                            rest &= ~(_ONE << np.uint64(w & 63))
                        if rest:
                            z = (k << 6) + ctz(rest)
                            size = _remove(adj, nbr_ptr, nbr, x, in_set, tight, sol_pos, sol, size)
                            size = _insert(adj, nbr_ptr, nbr, w, in_set, tight, sol_pos, sol, size)
                            size = _insert(adj, nbr_ptr, nbr, z, in_set, tight, sol_pos, sol, size)
                            found = True
                            break
                    if found:
                        break
            if found:
                improved = True
            else:
                j += 1
    return size


@nb.njit(cache=True)
def _push(v, stack, top, queued):
    if not queued[v]:
        queued[v] = True
        stack[top] = v
        top += 1
    return top


@nb.njit(cache=True)
def _push_around(u, nbr_ptr, nbr, in_set, tight, stack, top, queued):
    """Queue u, and if it is 1-tight also the solution vertex it hangs on."""
    top = _push(u, stack, top, queued)
    if not in_set[u] and tight[u] == 1:
        for t in range(nbr_ptr[u], nbr_ptr[u + 1]):
            if in_set[nbr[t]]:
                top = _push(nbr[t], stack, top, queued)
                break
    return top


@nb.njit(cache=True)
def _remove_and_queue(adj, nbr_ptr, nbr, x, in_set, tight, sol_pos, sol, size, stack, top, queued):
    size = _remove(adj, nbr_ptr, nbr, x, in_set, tight, sol_pos, sol, size)
    top = _push(x, stack, top, queued)
    for t in range(nbr_ptr[x], nbr_ptr[x + 1]):
        top = _push_around(nbr[t], nbr_ptr, nbr, in_set, tight, stack, top, queued)
    return size, top


@nb.njit(cache=True)
def _local_search_queued(adj, nbr_ptr, nbr, in_set, tight, sol_pos, sol, size, cand,
                         stack, top, queued):
    """Free insertions and (1,2)-swaps, revisiting only vertices near a change."""
    W = adj.shape[1]
    while top > 0:
        top -= 1
        v = stack[top]
        queued[v] = False
        if not in_set[v]:
            if tight[v] == 0:
                size = _insert(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size)
            continue
        x = v
        for k in range(W):
            cand[k] = np.uint64(0)
        cnt = 0
        for t in range(nbr_ptr[x], nbr_ptr[x + 1]):
            w = nbr[t]
            if tight[w] == 1:
                _set(cand, w)
                cnt += 1
        if cnt < 2:
            continue
        for t in range(nbr_ptr[x], nbr_ptr[x + 1]):
            w = nbr[t]
            if tight[w] != 1:
                continue
            z = -1
            for k in range(W):
                rest = cand[k] & ~adj[w, k]
                if k == (w >> 6):
                    rest &= ~(_ONE << np.uint64(w & 63))
                if rest:
                    z = (k << 6) + ctz(rest)
                    break
            if z >= 0:
                size, top = _remove_and_queue(adj, nbr_ptr, nbr, x, in_set, tight, sol_pos, sol,
                                              size, stack, top, queued)
                size = _insert(adj, nbr_ptr, nbr, w, in_set, tight, sol_pos, sol, size)
                size = _insert(adj, nbr_ptr, nbr, z, in_set, tight, sol_pos, sol, size)
                top = _push(w, stack, top, queued)
                top = _push(z, stack, top, queued)
                break
    return size, top


@nb.njit(cache=True)
def iterated_local_search(adj, nbr_ptr, nbr, n, start_bits, iterations, seed):
    """Perturb-by-forced-insertion then local search; returns (best size, best bits)."""
    np.random.seed(seed)
    W = adj.shape[1]
    in_set = np.zeros(n, dtype=np.bool_)
    tight = np.zeros(n, dtype=np.int64)
    sol_pos = -np.ones(n, dtype=np.int64)
    sol = np.zeros(n, dtype=np.int64)
    cand = np.zeros(W, dtype=np.uint64)
    size = 0
    for v in range(n):
        if _has(start_bits, v):
            size = _insert(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size)
    size = _local_search(adj, nbr_ptr, nbr, in_set, tight, sol_pos, sol, size, n, cand)
    best = size
    best_sol = sol[:size].copy()
    stack = np.zeros(n, dtype=np.int64)
    queued = np.zeros(n, dtype=np.bool_)
    top = 0
    for it in range(iterations):
        if size < best - 1:
            # drift too far: restart from the best solution seen
            while size > 0:
                size = _remove(adj, nbr_ptr, nbr, sol[size - 1], in_set, tight, sol_pos, sol, size)
            for j in range(best):
                size = _insert(adj, nbr_ptr, nbr, best_sol[j], in_set, tight, sol_pos, sol, size)
        # force a random outside vertex in (two half the time)
        forced = 1 if np.random.random() < 0.5 else 2
        for _ in range(forced):
            v = np.random.randint(0, n)
            tries = 0
            while in_set[v] and tries < 8:
                v = np.random.randint(0, n)
                tries += 1
            if in_set[v]:
                continue
            for t in range(nbr_ptr[v], nbr_ptr[v + 1]):
                w = nbr[t]
                if in_set[w]:
                    size, top = _remove_and_queue(adj, nbr_ptr, nbr, w, in_set, tight, sol_pos, sol,
                                                  size, stack, top, queued)
            size = _insert(adj, nbr_ptr, nbr, v, in_set, tight, sol_pos, sol, size)
            top = _push(v, stack, top, queued)
        size, top = _local_search_queued(adj, nbr_ptr, nbr, in_set, tight, sol_pos, sol, size, cand,
                                         stack, top, queued)
        if size > best:
            best = size
            best_sol = sol[:size].copy()
    out = np.zeros(W, dtype=np.uint64)
    for j in range(best):
        _set(out, best_sol[j])
    return best, out
