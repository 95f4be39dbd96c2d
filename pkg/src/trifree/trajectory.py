"""Idealized trajectories with their error envelopes, plus the tools that judge a run against them.

Logs are natural throughout.  Time is t = m / n^{3/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

SQRT8_INV = 1.0 / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class Params:
    """Scale and proof constants for one value of n."""

    n: int
    eps: float = 0.1
    big_c: float = 20.0
    omega: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 < self.eps < 0.125:
            raise ValueError(f"eps must lie in (0, 1/8), got {self.eps}")
        if self.big_c <= 0:
            raise ValueError("big_c must be positive")

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def omega_value(self) -> float:
        if self.omega is not None:
            return self.omega
        lll = math.log(max(math.log(max(math.log(self.n), 1.0)), 1.0))
        return float(max(1, math.floor(lll)))

    @property
    def k_short(self) -> int:
        return math.ceil(3.0 / self.eps - 1e-12)

    @property
    def t_star(self) -> float:
        return (SQRT8_INV - self.eps) * math.sqrt(self.log_n)

    @property
    def m_star(self) -> int:
        return math.floor(self.t_star * self.n ** 1.5)

    def as_dict(self) -> dict:
        return {"n": self.n, "eps": self.eps, "big_c": self.big_c, "omega": self.omega_value,
                "k_short": self.k_short, "t_star": self.t_star, "m_star": self.m_star}


def time_map(params: Params, m: float) -> float:
    if m < 0:
        raise ValueError("m must be non-negative")
    return m / params.n ** 1.5


def t_star(params: Params) -> float:
    return params.t_star


def m_star(params: Params) -> int:
    return params.m_star


def tilde(params: Params, which: str, m: float) -> float:
    """Expected path of the quantity named by ``which`` at step m."""
    t = time_map(params, m)
    n = params.n
    if which == "Q":
        return math.exp(-4 * t * t) * n * (n - 1) / 2
    if which == "X":
        return 2 * math.exp(-8 * t * t) * n
    if which == "Y":
        return 4 * t * math.exp(-4 * t * t) * math.sqrt(n)
    raise ValueError(f"unknown variable {which!r}; expected Q, X or Y")


ENVELOPES = ("g_q", "g_x", "g_y", "g_sigma", "f_y", "f_x")


def envelope(params: Params, which: str, t: float, length: int = 0) -> float:
    """Relative error envelope at time t.  ``length`` is |σ| for g_sigma."""
    if t < 0:
        raise ValueError("t must be non-negative")
    n, ln = params.n, params.log_n
    base = math.exp(2 * t * t) * n ** -0.25
    if which == "g_q":
        return base * ln ** 3
    if which == "g_y":
        return base * ln ** 4
    if which == "g_x":
        return params.big_c * base * ln ** 4
    if which == "g_sigma":
        return params.eps ** length * base * ln ** 4
    f_y = math.exp(params.big_c * t * t) * n ** -0.25 * ln ** 2.5
    if which == "f_y":
        return f_y
    if which == "f_x":
        return math.exp(-4 * t * t) * f_y
    raise ValueError(f"unknown envelope {which!r}; expected one of {ENVELOPES}")


def normalized_error(value: float, tilde_value: float, env: float) -> float:
    """(value - tilde) / (env * tilde)."""
    if not (tilde_value > 0 and env > 0 and math.isfinite(tilde_value * env)):
        raise ValueError(f"degenerate denominator: tilde={tilde_value}, envelope={env}")
    return (value - tilde_value) / (env * tilde_value)


def whirlpool(eps: float, ybar_star: float, q_star: float) -> tuple[float, float]:
    """Coordinates (lambda, mu) of (Y*, Q*) in the rotating basis."""
    if eps == 0:
        raise ValueError("eps must be non-zero")
    c = 1.0 / (8.0 * eps)
    return c * (-3.0 * ybar_star + 5.0 * q_star), c * (4.0 * ybar_star - 4.0 * q_star)


def whirlpool_inverse(eps: float, lam: float, mu: float) -> tuple[float, float]:
    """(Y*, Q*) = eps * [[4, 5], [4, 3]] (lambda, mu)."""
    if eps == 0:
        raise ValueError("eps must be non-zero")
    return eps * (4.0 * lam + 5.0 * mu), eps * (4.0 * lam + 3.0 * mu)


def lyapunov(lam: float, mu: float) -> float:
    return lam * lam + mu * mu


@dataclass(frozen=True)
class MartingaleQuery:
    alpha: float
    beta: float
    s: float
    x: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.s > 0):
            raise ValueError("alpha, beta and s must be positive")
        if self.x < 0:
            raise ValueError("x must be non-negative")
        if self.x > self.beta * self.s:
            raise ValueError(f"bound only valid for x <= beta*s = {self.beta * self.s}")


def martingale_bound(q: MartingaleQuery) -> float:
    """Tail bound exp(-x^2 / (4 alpha beta s)) for bounded-step martingales."""
    return math.exp(-q.x * q.x / (4.0 * q.alpha * q.beta * q.s))


def slow_factor(k: float, ell: float, a: float) -> float:
    """A λ for which t^k e^{ℓ t^2} (k, ℓ >= 0) is λ-slow on [a, ∞)."""
    if a <= 0:
        raise ValueError("a must be positive")
    return (1 + 1 / a**2) ** k * math.exp(ell * (2 + 1 / a**2))


def lambda_slow_check(samples, lam: float, a: float | None = None, b: float | None = None) -> bool:
    """Does the sampled function vary by at most a factor lam on every [x, x+1/x], a <= x <= b?

    Window contents only change at sample points, so it suffices to test, for
    each run of anchors between consecutive samples, the widest window.
    """
    pts = sorted((float(t), float(v)) for t, v in samples)
    if not pts:
        raise ValueError("no samples")
    ts = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(vs <= 0):
        raise ValueError("values must be positive")
    a = ts[0] if a is None else a
    b = ts[-1] if b is None else b
    if a <= 0:
        raise ValueError("the anchor range must start at a positive time")
    for i in range(len(ts)):
        lo = a if i == 0 else max(a, ts[i - 1])
        hi = min(b, ts[i])
        if lo > hi:
            continue
        reach = max(lo + 1 / lo, hi + 1 / hi)
        j = np.searchsorted(ts, reach, side="right")
        window = vs[i:j]
        if window.max() > lam * window.min() * (1 + 1e-12):
            return False
    return True


def crossing_events(series) -> list[tuple[int, int, str]]:
    """Peril-to-death excursions of a normalized error series.

    Each event (r, s, sign): step r+1 is the last upcrossing of |a*| = 1/2
    before |a*| first reaches 1 at step r+s.  After a death a fresh
    upcrossing is needed before another event can be reported.
    """
    events = []
    prev_abs = 0.0
    up_at = None
    for m, a in series:
        cur = abs(a)
        if prev_abs < 0.5 <= cur:
            up_at = m
        if cur >= 1.0 and up_at is not None:
            r = up_at - 1
            events.append((r, m - r, "+" if a > 0 else "-"))
            up_at = None
        prev_abs = cur
    return events


@dataclass
class RunRecord:
    m: int
    t: float
    q: int
    q_tilde: float
    q_star: float
    ybar: float
    y_tilde: float
    ybar_star: float
    xbar: float
    x_tilde: float
    xbar_star: float
    lambda_: float
    mu: float
    lyapunov: float
    max_deg: int
    var_y: float
    cov_xy: float
    sample_size: int

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _star(value: float, tilde_value: float, env: float) -> float:
    if tilde_value > 0 and env > 0 and math.isfinite(env * tilde_value) and env * tilde_value > 0:
        return normalized_error(value, tilde_value, env)
    return math.nan


def make_record(params: Params, m: int, q: int, ybar: float, xbar: float, var_y: float,
                cov_xy: float, max_deg: int, sample_size: int) -> RunRecord:
    t = time_map(params, m)
    g = envelope(params, "g_q", t)
    qt, yt, xt = tilde(params, "Q", m), tilde(params, "Y", m), tilde(params, "X", m)
    qs, ys, xs = _star(q, qt, g), _star(ybar, yt, g), _star(xbar, xt, g)
    if math.isnan(qs) or math.isnan(ys):
        lam = mu = lyap = math.nan
    else:
        lam, mu = whirlpool(params.eps, ys, qs)
        lyap = lyapunov(lam, mu)
    return RunRecord(m, t, q, qt, qs, ybar, yt, ys, xbar, xt, xs, lam, mu, lyap,
                     max_deg, var_y, cov_xy, sample_size)


def sample_record(state, params: Params, sample_size: int = 4096) -> RunRecord:
    """Measure a live process state and wrap it as a RunRecord."""
    from .analysis import moment_stats
    from .process import degrees

    if state.q > 0:
        ms = moment_stats(state, sample_size)
        ybar, xbar, var_y, cov_xy, used = ms.ybar, ms.xbar, ms.var_y, ms.cov_xy, ms.sample_size
    else:
        ybar = xbar = var_y = cov_xy = math.nan
        used = 0
    return make_record(params, state.m, state.q, ybar, xbar, var_y, cov_xy,
                       int(degrees(state).max()), used)


def vacuous(params: Params, record: RunRecord) -> bool:
    """True when the envelope g_q exceeds 1 at the record's time."""
    return envelope(params, "g_q", record.t) > 1.0
