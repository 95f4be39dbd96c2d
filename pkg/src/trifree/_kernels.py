"""numba kernels for the process engine.

Pairs {u, v} with u < v are addressed two ways: a code u*n + v stored in the
dense open list, and a triangular index used for the reverse map and the
per-pair Y counters.
"""

import numba as nb
import numpy as np

from .rng import nb_below, nb_seed_stream

_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)
_U4 = np.uint64(4)
_U56 = np.uint64(56)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)

# slots of the int64 counter array
M, Q, YBB = 0, 1, 2
# slots of the per-step info array
I_U, I_V, I_NCLOSED, I_XE, I_SUMYF, I_DYBB = 0, 1, 2, 3, 4, 5


@nb.njit(cache=True, inline="always")
def popcount(x):
    x = x - ((x >> _U1) & _M1)
    x = (x & _M2) + ((x >> _U2) & _M2)
    x = (x + (x >> _U4)) & _M4
    return np.int64((x * _H01) >> _U56)


@nb.njit(cache=True, inline="always")
def ctz(x):
    return popcount((x & (~x + _ONE)) - _ONE)


@nb.njit(cache=True, inline="always")
def tri(u, v, n):
    if u > v:
        u, v = v, u
    return np.int64(u) * (2 * np.int64(n) - u - 1) // 2 + (v - u - 1)


@nb.njit(cache=True, inline="always")
def _bit(w):
    return _ONE << np.uint64(w & 63)


@nb.njit(cache=True)
def and_count(a, b):
    c = 0
    for i in range(a.shape[0]):
        c += popcount(a[i] & b[i])
    return c


@nb.njit(cache=True)
def init_open(n, opn, open_list, pos):
    """Fill openness with every off-diagonal pair in lexicographic order."""
    W = opn.shape[1]
    for u in range(n):
        for i in range(W):
            opn[u, i] = ~_ZERO
        # clear the diagonal and the tail beyond n
        opn[u, u >> 6] &= ~_bit(u)
        rem = n & 63
        if rem:
            opn[u, W - 1] &= (_ONE << np.uint64(rem)) - _ONE
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            open_list[k] = u * n + v
            pos[k] = k
            k += 1
    return k


@nb.njit(cache=True, inline="always")
def _remove_open(u, v, n, opn, open_list, pos, ctr):
    t = tri(u, v, n)
    p = pos[t]
    last = ctr[Q] - 1
    code = open_list[last]
    open_list[p] = code
    a = code // n
    b = code - a * n
    pos[tri(a, b, n)] = p
    pos[t] = -1
    ctr[Q] = last
    opn[u, v >> 6] &= ~_bit(v)
    opn[v, u >> 6] &= ~_bit(u)


@nb.njit(cache=True)
def _y_decrement(a, b, n, adj, opn, y, dead):
    """Decrement counters of every g in Y_{ab}; return how many survive the step."""
    W = adj.shape[1]
    surv = 0
    for side in range(2):
        x = a if side == 0 else b
        z = b if side == 0 else a
        for i in range(W):
            word = opn[x, i] & adj[z, i]
            while word:
                w = (i << 6) + ctz(word)
                word &= word - _ONE
                g = tri(x, w, n)
                y[g] -= 1
                if dead[g] == 0:
                    surv += 1
    return surv


@nb.njit(cache=True)
def core_step(n, adj, opn, open_list, pos, ctr, hist, base, full, y, dead,
              closed_buf, info, fu, fv):
    """Advance one step.  (fu, fv) >= 0 forces the chosen pair (replay).

    Returns 0 on success, 1 if no open pair remains, 2 if a forced pair is not open.
    """
    q = ctr[Q]
    if q == 0:
        return 1
    W = adj.shape[1]
    if fu >= 0:
        u, v = (fu, fv) if fu < fv else (fv, fu)
        if u == v or pos[tri(u, v, n)] < 0:
            return 2
    else:
        s = np.empty(4, dtype=np.uint64)
        nb_seed_stream(base, ctr[M], s)
        idx = nb_below(s, q)
        code = open_list[idx]
        u = code // n
        v = code - u * n
    # pairs closed by e, in the fixed order: around u, then around v
    nc = 0
    for i in range(W):
        word = adj[v, i] & opn[u, i]
        while word:
            closed_buf[nc, 0] = u
            closed_buf[nc, 1] = (i << 6) + ctz(word)
            nc += 1
            word &= word - _ONE
    for i in range(W):
        word = adj[u, i] & opn[v, i]
        while word:
            closed_buf[nc, 0] = v
            closed_buf[nc, 1] = (i << 6) + ctz(word)
            nc += 1
            word &= word - _ONE
    xe = 0
    sum_yf = 0
    removed = 0
    surv = 0
    if full:
        xe = 2 * and_count(opn[u], opn[v])
        te = tri(u, v, n)
        dead[te] = 1
        removed = y[te]
        for j in range(nc):
            tf = tri(closed_buf[j, 0], closed_buf[j, 1], n)
            dead[tf] = 1
            sum_yf += y[tf]
        removed += sum_yf
        surv += _y_decrement(u, v, n, adj, opn, y, dead)
        for j in range(nc):
            surv += _y_decrement(closed_buf[j, 0], closed_buf[j, 1], n, adj, opn, y, dead)
    # structural update
    _remove_open(u, v, n, opn, open_list, pos, ctr)
    adj[u, v >> 6] |= _bit(v)
    adj[v, u >> 6] |= _bit(u)
    for j in range(nc):
        _remove_open(closed_buf[j, 0], closed_buf[j, 1], n, opn, open_list, pos, ctr)
    if full:
        inc = 0
        for i in range(W):
            word = opn[u, i] & opn[v, i]
            while word:
                w = (i << 6) + ctz(word)
                word &= word - _ONE
                y[tri(u, w, n)] += 1
                y[tri(v, w, n)] += 1
                inc += 2
        te = tri(u, v, n)
        y[te] = 0
        dead[te] = 0
        for j in range(nc):
            tf = tri(closed_buf[j, 0], closed_buf[j, 1], n)
            y[tf] = 0
            dead[tf] = 0
        d = inc - surv - removed
        ctr[YBB] += d
        info[I_DYBB] = d
    k = ctr[M]
    hist[k, 0] = u
    hist[k, 1] = v
    ctr[M] = k + 1
    info[I_U] = u
    info[I_V] = v
    info[I_NCLOSED] = nc
    info[I_XE] = xe
    info[I_SUMYF] = sum_yf
    return 0


@nb.njit(cache=True)
def run_steps(n, adj, opn, open_list, pos, ctr, hist, base, full, y, dead,
              closed_buf, info, stop_m):
    """Step until ctr[M] == stop_m or until the history buffer fills or the process ends."""
    cap = hist.shape[0]
    done = 0
    while ctr[M] < stop_m and ctr[M] < cap:
        if core_step(n, adj, opn, open_list, pos, ctr, hist, base, full, y, dead,
                     closed_buf, info, -1, -1) != 0:
            break
        done += 1
    return done


@nb.njit(cache=True)
def replay(n, adj, opn, open_list, pos, ctr, hist, base, full, y, dead,
           closed_buf, info, edges):
    for j in range(edges.shape[0]):
        r = core_step(n, adj, opn, open_list, pos, ctr, hist, base, full, y, dead,
                      closed_buf, info, edges[j, 0], edges[j, 1])
        if r != 0:
            return j
    return -1


@nb.njit(cache=True)
def pair_yx(n, adj, opn, a, b):
    """(Y, X) of the pair {a, b} from the bit rows."""
    W = adj.shape[1]
    yv = 0
    xv = 0
    for i in range(W):
        yv += popcount(opn[a, i] & adj[b, i]) + popcount(opn[b, i] & adj[a, i])
        xv += popcount(opn[a, i] & opn[b, i])
    return yv, 2 * xv


@nb.njit(cache=True)
def moment_sums(n, adj, opn, open_list, idx):
    """Integer sums (ΣY, ΣY², ΣX, ΣXY) over open_list[idx] (all of 0..q-1 if idx is empty)."""
    sy = 0
    syy = 0
    sx = 0
    sxy = 0
    cnt = idx.shape[0]
    for j in range(cnt):
        code = open_list[idx[j]]
        a = code // n
        b = code - a * n
        yv, xv = pair_yx(n, adj, opn, a, b)
        sy += yv
        syy += yv * yv
        sx += xv
        sxy += xv * yv
    return sy, syy, sx, sxy


@nb.njit(cache=True)
def moment_sums_all(n, adj, opn, open_list, q):
    sy = 0
    syy = 0
    sx = 0
    sxy = 0
    for j in range(q):
        code = open_list[j]
        a = code // n
        b = code - a * n
        yv, xv = pair_yx(n, adj, opn, a, b)
        sy += yv
        syy += yv * yv
        sx += xv
        sxy += xv * yv
    return sy, syy, sx, sxy


@nb.njit(cache=True)
def row_counts(rows, n):
    out = np.empty(n, dtype=np.int64)
    for u in range(n):
        c = 0
        for i in range(rows.shape[1]):
            c += popcount(rows[u, i])
        out[u] = c
    return out


@nb.njit(cache=True)
def all_y(n, adj, opn, open_list, q, out):
    """Y of every open pair, indexed by triangular index (others left untouched)."""
    for j in range(q):
        code = open_list[j]
        a = code // n
        b = code - a * n
        yv, _ = pair_yx(n, adj, opn, a, b)
        out[tri(a, b, n)] = yv
