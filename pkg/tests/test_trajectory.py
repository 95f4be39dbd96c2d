import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trifree import trajectory as T
from trifree.trajectory import MartingaleQuery, Params

P16 = Params(n=2**16, eps=0.1)
FINITE = st.floats(-1e3, 1e3, allow_nan=False)


def test_time_map_and_t_star():
    p = Params(n=4096)
    assert T.time_map(p, 0) == 0
    assert T.time_map(p, 4096**1.5) == pytest.approx(1.0)
    # (1/(2 sqrt 2) - 0.1) * sqrt(ln 2^16) = 0.844388..; the often-quoted 0.84456 is a rounding slip
    assert T.t_star(P16) == pytest.approx((1 / math.sqrt(8) - 0.1) * math.sqrt(16 * math.log(2)))
    assert T.t_star(P16) == pytest.approx(0.84456, abs=5e-4)
    assert T.m_star(P16) == math.floor(T.t_star(P16) * 2**24)


def test_tilde_at_zero():
    p = Params(n=500)
    assert T.tilde(p, "Q", 0) == 500 * 499 / 2
    assert T.tilde(p, "Y", 0) == 0
    assert T.tilde(p, "X", 0) == 1000


@given(t=st.floats(0.01, 2.0))
def test_y_over_q_identity(t):
    p = Params(n=10_000)
    m = t * p.n**1.5
    ratio = T.tilde(p, "Y", m) / T.tilde(p, "Q", m) * m
    assert ratio == pytest.approx(8 * t * t * p.n / (p.n - 1), rel=1e-9)


@given(t=st.floats(0, 3))
def test_envelope_relations(t):
    p = Params(n=2**14, big_c=20)
    g_y = T.envelope(p, "g_y", t)
    assert T.envelope(p, "g_x", t) == pytest.approx(20 * g_y)
    assert T.envelope(p, "g_sigma", t, 0) == pytest.approx(g_y)
    assert T.envelope(p, "g_sigma", t, 3) == pytest.approx(p.eps**3 * g_y)


def test_g_y_at_zero():
    p = Params(n=2**14)
    assert T.envelope(p, "g_y", 0) == pytest.approx(p.n**-0.25 * p.log_n**4)


def test_normalized_error_lines():
    assert T.normalized_error(5.0, 5.0, 0.1) == 0
    assert T.normalized_error(5.0 * 1.1, 5.0, 0.1) == pytest.approx(1)
    assert T.normalized_error(5.0 * 0.95, 5.0, 0.1) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        T.normalized_error(1.0, 0.0, 0.1)


def test_whirlpool_columns():
    eps = 0.1
    assert T.whirlpool(eps, 0, 0) == (0, 0) and T.lyapunov(0, 0) == 0
    assert T.whirlpool_inverse(eps, 1, 0) == pytest.approx((4 * eps, 4 * eps))
    assert T.whirlpool(eps, 5 * eps, 3 * eps) == pytest.approx((0, 1))


@given(eps=st.floats(1e-3, 0.124), y=FINITE, q=FINITE)
def test_whirlpool_round_trip(eps, y, q):
    lam, mu = T.whirlpool(eps, y, q)
    y2, q2 = T.whirlpool_inverse(eps, lam, mu)
    assert abs(y2 - y) <= 1e-12 * max(1, abs(y), abs(q))
    assert abs(q2 - q) <= 1e-12 * max(1, abs(y), abs(q))


def test_martingale_spot_values():
    assert abs(T.martingale_bound(MartingaleQuery(1, 1, 4, 2)) - math.exp(-0.25)) <= 1e-15
    assert T.martingale_bound(MartingaleQuery(2, 3, 5, 0)) == 1
    a, b, s = 2.0, 3.0, 5.0
    assert T.martingale_bound(MartingaleQuery(a, b, s, b * s)) == pytest.approx(math.exp(-b * s / (4 * a)))
    with pytest.raises(ValueError):
        MartingaleQuery(1, 1, 4, 5)


@given(a=st.floats(0.1, 10), b=st.floats(0.1, 10), s=st.floats(0.1, 100), f=st.floats(0, 1))
def test_martingale_bound_monotone_in_x(a, b, s, f):
    x = f * b * s
    lo = T.martingale_bound(MartingaleQuery(a, b, s, x))
    assert 0 < lo <= 1
    assert T.martingale_bound(MartingaleQuery(a, b, s, x / 2)) >= lo


def test_lambda_slow_fixtures():
    ts = np.linspace(0.5, 6, 2000)
    assert T.lambda_slow_check([(t, 3.0) for t in ts], 1.0)
    for k, ell in [(1, 0.0), (2, 0.5), (0, 1.0), (3, 0.2)]:
        samples = [(t, t**k * math.exp(ell * t * t)) for t in ts]
        assert T.lambda_slow_check(samples, T.slow_factor(k, ell, 0.5), a=0.5, b=5.0)
    step = [(t, 1.0 if t < 3 else 10.0) for t in ts]
    assert not T.lambda_slow_check(step, 2.0)


def test_lambda_slow_respects_anchor_range():
    ts = np.linspace(1, 10, 500)
    jump = [(t, 1.0 if t < 8 else 100.0) for t in ts]
    assert T.lambda_slow_check(jump, 1.0, a=1.0, b=5.0)
    assert not T.lambda_slow_check(jump, 1.0, a=1.0, b=7.9)


def test_crossing_fixtures():
    assert T.crossing_events([(1, 0.0), (2, 0.3), (3, -0.4), (4, 0.49)]) == []
    assert T.crossing_events([(1, 0.0), (2, 0.6), (3, 0.8), (4, 1.1)]) == [(1, 3, "+")]
    assert T.crossing_events([(1, 0.0), (2, 0.7), (3, 0.4), (4, 0.7), (5, 1.2)]) == [(3, 2, "+")]
    assert T.crossing_events([(1, 0.0), (2, -0.6), (3, -1.0)]) == [(1, 2, "-")]


@given(st.lists(st.floats(-0.499, 0.499), max_size=50))
def test_no_events_inside_peril(values):
    assert T.crossing_events(list(enumerate(values, 1))) == []


@given(st.lists(st.floats(-2, 2, allow_nan=False), max_size=60))
def test_events_are_deaths_after_upcrossings(values):
    series = list(enumerate(values, 1))
    for r, s, sign in T.crossing_events(series):
        death = r + s
        assert abs(values[death - 1]) >= 1
        assert abs(values[r]) >= 0.5 and (r == 0 or abs(values[r - 1]) < 0.5 or r == 0)
        assert sign == ("+" if values[death - 1] > 0 else "-")


def test_make_record_fields_and_degenerate_stars():
    p = Params(n=1024)
    r = T.make_record(p, 0, p.n * (p.n - 1) // 2, 0.0, 2.0 * (p.n - 2), 0.0, 0.0, 0, 10)
    assert r.q_star == 0 and math.isnan(r.ybar_star) and math.isnan(r.lambda_)
    m = 5000
    r = T.make_record(p, m, 400_000, 9.0, 1500.0, 2.0, 0.5, 30, 4096)
    assert r.t == pytest.approx(m / p.n**1.5)
    lam, mu = T.whirlpool(p.eps, r.ybar_star, r.q_star)
    assert (r.lambda_, r.mu) == (lam, mu) and r.lyapunov == pytest.approx(lam * lam + mu * mu)
    assert T.RunRecord.field_names()[0] == "m" and len(T.RunRecord.field_names()) == 18


def test_vacuous_flag():
    small = Params(n=1024)
    rec = T.make_record(small, 100, 500_000, 1.0, 2000.0, 0.0, 0.0, 1, 1)
    assert T.vacuous(small, rec)


def test_params_validation():
    with pytest.raises(ValueError):
        Params(n=100, eps=0.2)
    with pytest.raises(ValueError):
        Params(n=1)
    assert Params(n=100).k_short == 30
