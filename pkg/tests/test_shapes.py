import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psibeta.shapes import (
    builtin_omega,
    builtin_psi,
    check_modulus,
    check_psi_shape,
    classify,
    half_decay_eta,
    half_decay_mu,
    parse_omega,
    parse_psi,
    psi_from_callable,
    tail_integral_bound_check,
)


def test_builtin_values():
    assert builtin_psi("power", 2)(3.0) == pytest.approx(1 / 9, rel=1e-15)
    w = builtin_omega("loginv", 1)
    assert w(0.0) == 0.0
    lin = builtin_omega("power", 1)
    assert lin(0.3) == pytest.approx(0.3) and lin.concave_flag


@pytest.mark.parametrize("kind,param", [("power", -1.0), ("power", 0.0), ("logpower", 0.0), ("logpower", math.inf)])
def test_builtin_psi_rejects_bad_parameters(kind, param):
    with pytest.raises(ValueError):
        builtin_psi(kind, param)


@pytest.mark.parametrize("text", ["power:r=2", "logpower:gamma=2", "omega-power:alpha=0.5", "omega-loginv:alpha=1"])
def test_spec_round_trip(text):
    shape = parse_omega(text) if text.startswith("omega") else parse_psi(text)
    assert shape.spec == text


@pytest.mark.parametrize("text", ["power", "power:gamma=2", "power:r=abc", "omega-power:r=1", "cubic:r=1"])
def test_malformed_specs(text):
    with pytest.raises(ValueError):
        parse_psi(text) if not text.startswith("omega") else parse_omega(text)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 3.5])
def test_mu_constant_for_power(r):
    psi = builtin_psi("power", r)
    expected = 1 / (2 ** (1 / r) - 1)
    for t in np.geomspace(1, 1e6, 13):
        assert half_decay_mu(psi, float(t)) == pytest.approx(expected, rel=1e-10)


def test_mu_closed_form_log1():
    psi = builtin_psi("logpower", 1)
    assert half_decay_mu(psi, 1.0) == pytest.approx(0.5, rel=1e-10)
    assert half_decay_mu(psi, 9.0) == pytest.approx(0.1, rel=1e-10)
    # eta(t) = (t + 1)^2 - 1
    assert half_decay_eta(psi, 3.0) == pytest.approx(15.0, rel=1e-10)


def test_mu_decreases_for_logpower():
    psi = builtin_psi("logpower", 2)
    mu = np.array([half_decay_mu(psi, float(t)) for t in np.geomspace(1, 1e8, 40)])
    assert np.all(np.diff(mu) < 0)


@pytest.mark.parametrize("spec", ["power:r=2", "power:r=0.7", "logpower:gamma=2", "logpower:gamma=1.5"])
def test_builtin_shape_checks(spec):
    rep = check_psi_shape(parse_psi(spec))
    assert rep["ok"], rep


@pytest.mark.parametrize("spec", ["omega-power:alpha=0.5", "omega-power:alpha=1", "omega-loginv:alpha=1"])
def test_builtin_modulus_checks(spec):
    rep = check_modulus(parse_omega(spec))
    assert rep["ok"] and rep["concave"], rep


def test_classify_examples():
    r = classify(parse_psi("power:r=2"), 1.0)
    assert r.in_MC and r.in_M0 and r.in_Mprime and not r.inconclusive
    r = classify(parse_psi("logpower:gamma=2"), 1.0)
    assert r.in_M0 and not r.in_MC and r.in_Mprime
    r = classify(parse_psi("logpower:gamma=0.5"), 0.0)
    assert r.in_M0 and r.in_Mprime and not r.integral_finite
    r = classify(parse_psi("logpower:gamma=0.5"), 1.0)
    assert not r.in_Mprime


def test_classify_short_grid_is_inconclusive():
    assert classify(parse_psi("power:r=2"), 1.0, t_max=1e3).inconclusive


def test_classify_deterministic():
    psi = parse_psi("logpower:gamma=2")
    assert classify(psi, 1.0) == classify(psi, 1.0)


def test_tail_integral_closed_forms():
    psi = parse_psi("power:r=2")
    assert tail_integral_bound_check(psi, 1) == pytest.approx((0.5, 0.5), rel=1e-12)
    assert tail_integral_bound_check(psi, 2) == pytest.approx((0.125, 0.5), rel=1e-12)


def test_tail_ratio_grows_for_logpower():
    psi = parse_psi("logpower:gamma=2")
    ratios = [tail_integral_bound_check(psi, n)[1] for n in (10, 100, 1000, 10_000)]
    assert np.all(np.diff(ratios) > 0)
    # int_n^inf dt / (t ln^2 t) ~ 1 / ln n, so the ratio is about ln(n + 1)
    assert ratios[-1] == pytest.approx(math.log(10_001), rel=0.05)


def test_tail_integral_diverges_for_small_gamma():
    with pytest.raises(ArithmeticError):
        tail_integral_bound_check(parse_psi("logpower:gamma=1"), 4)


def test_callable_shape_matches_builtin():
    custom = psi_from_callable(lambda t: np.asarray(t, dtype=float) ** -2.0)
    ref = parse_psi("power:r=2")
    t = np.geomspace(1, 1e4, 20)
    assert np.allclose(custom.deriv_plus(t), ref.deriv_plus(t), rtol=1e-5)
    assert custom.tail_integral(2.0) == pytest.approx(0.125, rel=1e-8)


def test_log_evaluators_match_direct():
    psi, omega = parse_psi("logpower:gamma=2"), parse_omega("omega-loginv:alpha=1")
    x = np.linspace(0, 30, 7)
    assert np.allclose(psi.at_log(x), psi(np.exp(x)), rtol=1e-12)
    assert np.allclose(omega.at_log_inv(x), omega(np.exp(-x)), rtol=1e-12)
    # far beyond float range the log forms stay finite
    assert psi.at_log(1e4) == pytest.approx(1e-8, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.2, 5.0), t=st.floats(1.0, 1e6))
def test_power_inverse_round_trip(r, t):
    psi = builtin_psi("power", r)
    assert psi.inverse(psi(t)) == pytest.approx(t, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0.5, 4.0), t=st.floats(1.0, 1e8))
def test_logpower_inverse_round_trip(g, t):
    psi = builtin_psi("logpower", g)
    assert psi.inverse(psi(t)) == pytest.approx(t, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.05, 1.0), s=st.floats(1e-6, 3.0), u=st.floats(1e-6, 3.0))
def test_power_modulus_subadditive(a, s, u):
    w = builtin_omega("power", a)
    assert w(s + u) <= w(s) + w(u) + 1e-12


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.1, 10.0), t=st.floats(1e-6, 1.0))
def test_scaled_modulus(c, t):
    w = parse_omega("omega-loginv:alpha=1")
    assert w.scaled(c)(t) == pytest.approx(c * w(t), rel=1e-14)
