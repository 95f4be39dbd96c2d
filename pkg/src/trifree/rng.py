"""Counter-keyed xoshiro256++ streams seeded through SplitMix64.

Every step m of a run draws from its own stream keyed by (seed, m).  A run
restored from a snapshot at step m therefore continues with exactly the
draws an uninterrupted run would have made.

Two implementations live here: a plain-Python reference (arbitrary
precision integers, masked to 64 bits) and numba kernels used by the
process engine.  Tests pin them against each other.
"""

from __future__ import annotations

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STEP_MIX = 0xD1B54A32D192ED03


def splitmix64_next(state: int) -> tuple[int, int]:
    """Return (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256pp:
    """Reference xoshiro256++ generator."""

    def __init__(self, s: list[int]):
        if len(s) != 4 or not any(s):
            raise ValueError("state must be four words, not all zero")
        self.s = [w & MASK64 for w in s]

    @classmethod
    def from_seed(cls, seed: int) -> "Xoshiro256pp":
        st = seed & MASK64
        words = []
        for _ in range(4):
            st, out = splitmix64_next(st)
            words.append(out)
        return cls(words)

    def next(self) -> int:
        s = self.s
        result = (_rotl((s[0] + s[3]) & MASK64, 23) + s[0]) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, q: int) -> int:
        """Uniform integer in [0, q) via multiply-high with rejection."""
        if q <= 0:
            raise ValueError("q must be positive")
        prod = self.next() * q
        low = prod & MASK64
        if low < q:
            thresh = ((1 << 64) - q) % q
            while low < thresh:
                prod = self.next() * q
                low = prod & MASK64
        return prod >> 64


def step_key(seed: int, m: int) -> int:
    """Seed word for the stream used at step index m (0-based)."""
    _, base = splitmix64_next(seed & MASK64)
    _, key = splitmix64_next(base ^ ((m * STEP_MIX) & MASK64))
    return key


def step_stream(seed: int, m: int) -> Xoshiro256pp:
    return Xoshiro256pp.from_seed(step_key(seed, m))


def draw_index(seed: int, m: int, q: int) -> int:
    """Reference for the index the engine draws at step index m with q open pairs."""
    return step_stream(seed, m).below(q)


# ---------------------------------------------------------------- numba side

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U41 = np.uint64(41)
_U45 = np.uint64(45)
_U19 = np.uint64(19)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(GOLDEN)
_SMIX = np.uint64(STEP_MIX)
_LO32 = np.uint64(0xFFFFFFFF)


@nb.njit(cache=True, inline="always")
def _sm_out(state):
    z = state
    z = (z ^ (z >> _U30)) * _MUL1
    z = (z ^ (z >> _U27)) * _MUL2
    return z ^ (z >> _U31)


@nb.njit(cache=True)
def nb_base_key(seed):
    return _sm_out(np.uint64(seed) + _GOLD)


@nb.njit(cache=True)
def nb_seed_stream(base, m, s):
    """Fill s (uint64[4]) with the xoshiro state for step index m."""
    key = _sm_out((np.uint64(base) ^ (np.uint64(m) * _SMIX)) + _GOLD)
    st = key
    for i in range(4):
        st = st + _GOLD
        s[i] = _sm_out(st)


@nb.njit(cache=True, inline="always")
def nb_next(s):
    a = s[0] + s[3]
    result = ((a << _U23) | (a >> _U41)) + s[0]
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U45) | (s[3] >> _U19)
    return result


@nb.njit(cache=True, inline="always")
def _mul_hi_lo(x, y):
    xl = x & _LO32
    xh = x >> _U32
    yl = y & _LO32
    yh = y >> _U32
    ll = xl * yl
    lh = xl * yh
    hl = xh * yl
    hh = xh * yh
    mid = (ll >> _U32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _U32) + (hl >> _U32) + (mid >> _U32)
    lo = x * y
    return hi, lo


@nb.njit(cache=True)
def nb_below(s, q):
    """Uniform integer in [0, q) (q >= 1), same rule as Xoshiro256pp.below."""
    qq = np.uint64(q)
    hi, lo = _mul_hi_lo(nb_next(s), qq)
    if lo < qq:
        thresh = (np.uint64(0) - qq) % qq
        while lo < thresh:
            hi, lo = _mul_hi_lo(nb_next(s), qq)
    return np.int64(hi)


@nb.njit(cache=True)
def nb_draw_index(base, m, q):
    s = np.empty(4, dtype=np.uint64)
    nb_seed_stream(base, m, s)
    return nb_below(s, q)
