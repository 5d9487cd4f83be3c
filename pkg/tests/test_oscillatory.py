import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from psibeta.oscillatory import (
    NoSignChangeError,
    S_direct,
    S_function,
    cos_over_t2_tail,
    exp_integral_tail,
    find_S_zero,
    finite_moment,
    fourier_tail,
    lemma2_scaled_integral,
    psi_tail_sine,
    si_tail,
    unit_moment,
)
from psibeta.shapes import parse_omega, parse_psi

import oracles

P2 = parse_psi("power:r=2")
PL = parse_psi("logpower:gamma=2")

# [oracle: tail_sine, mpmath quadosc]
TAIL_SINE_P2_N1_T1 = 0.5040670619069284
TAIL_SINE_LOG2_N8_T05 = 0.255986780519387


def test_si_tail_against_mpmath():
    import mpmath as mp

    for x in (0.1, 1.0, 7.5, 300.0):
        assert si_tail(x) == pytest.approx(float(mp.pi / 2 - mp.si(x)), rel=1e-13, abs=1e-16)
    with pytest.raises(ValueError):
        si_tail(0.0)


def test_cos_over_t2_tail_against_mpmath():
    import mpmath as mp

    for x in (0.5, 2.0, 40.0):
        ref = mp.quadosc(lambda t: mp.cos(t) / t**2, [x, mp.inf], omega=1)
        assert cos_over_t2_tail(x) == pytest.approx(float(ref), abs=1e-14)


@pytest.mark.parametrize("nu", [0.3, -2.0, 5.0])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_exp_integral_tail(nu, p):
    import mpmath as mp

    T = 3.0
    ref = mp.quadosc(lambda t: mp.exp(1j * nu * t) / t**p, [T, mp.inf], omega=abs(nu))
    assert exp_integral_tail(nu, T, p) == pytest.approx(complex(ref), abs=1e-13)


def test_exp_integral_tail_zero_frequency():
    assert exp_integral_tail(np.array([0.0]), 2.0, 3)[0] == pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        exp_integral_tail(np.array([0.0]), 2.0, 1)


def test_fourier_tail_known():
    # int_1^inf exp(i w u)/u du = -Ci(w) + i (pi/2 - Si(w))
    from scipy.special import sici

    w = np.array([0.5, 1.0, 3.0])
    v = fourier_tail(lambda u: 1.0 / u, w)
    si, ci = sici(w)
    assert np.allclose(v, -ci + 1j * (np.pi / 2 - si), atol=1e-10)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_unit_moment_closed_form(s):
    t = np.array([0.7, 4.0])
    A, B = unit_moment(s, t)
    for j, tv in enumerate(t):
        re, _ = integrate.quad(lambda u: u**s * math.cos(u * tv), 0, 1)
        im, _ = integrate.quad(lambda u: u**s * math.sin(u * tv), 0, 1)
        assert np.exp(1j * tv) * A[j] + B[j] == pytest.approx(re + 1j * im, abs=1e-13)


def test_finite_moment_bound():
    assert abs(finite_moment(2.0, 1.0, 0, 5.0)) <= 2 * 2.0 / 5.0
    with pytest.raises(ValueError):
        finite_moment(1.0, 1.0, 2, 1.0)


def test_sign_formula_first_interval():
    assert S_function(1.0, 1.0, math.pi / 2) > 0


@pytest.mark.parametrize("x", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("i", [0, 1])
def test_S_dual_route(x, i):
    assert S_function(1.0, 1.0, x, i) == pytest.approx(S_direct(1.0, 1.0, x, i), abs=1e-8)


def test_find_zero_examples():
    z = find_S_zero(1.0, 1.0, 0, 1)
    assert math.pi / 2 < z.zero < 3 * math.pi / 2 and z.residual <= 1e-10
    z = find_S_zero(2.0, 1.0, 0, 3)
    assert 5 * math.pi / 4 < z.zero < 7 * math.pi / 4
    with pytest.raises(ValueError):
        find_S_zero(1.0, 1.0, 0, 0)


def test_no_sign_change_error_reports_endpoints():
    err = NoSignChangeError("x", 1.0, 2.0)
    assert isinstance(err, ArithmeticError)


@pytest.mark.parametrize("a", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("s", [1.0, 2.0])
def test_sign_formula_all_k(a, s):
    for k in range(1, 11):
        x = (2 * k - 1) * math.pi / (2 * a)
        assert np.sign(S_function(a, s, x, 0)) == (-1) ** (k + 1)


def test_psi_tail_sine_frozen():
    assert psi_tail_sine(P2, 1, 1.0) == pytest.approx(TAIL_SINE_P2_N1_T1, abs=1e-9)
    assert psi_tail_sine(PL, 8, 0.5) == pytest.approx(TAIL_SINE_LOG2_N8_T05, abs=1e-9)


def test_psi_tail_sine_live_oracle():
    v = oracles.tail_sine(oracles.psi_power(2), 3, 0.4)
    assert psi_tail_sine(P2, 3, 0.4) == pytest.approx(v, abs=1e-10)


def test_psi_tail_sine_vanishes_at_zero():
    vals = psi_tail_sine(P2, 2, np.array([1e-2, 1e-3, 1e-4]))
    # about t ln(1/t) / 4 for small t
    assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-3
    with pytest.raises(ValueError):
        psi_tail_sine(P2, 2, 0.0)


def test_lemma2_examples():
    w = parse_omega("omega-power:alpha=0.5")
    for n in (4, 16, 64):
        _, r = lemma2_scaled_integral(w, n, float(n), 1.0, 0)
        assert r <= 16 * math.pi
    wl = parse_omega("omega-loginv:alpha=1")
    ratios = [lemma2_scaled_integral(wl, n, float(n), 1.0, 0)[1] for n in (4, 16, 64, 256)]
    assert max(ratios) / min(ratios) <= 4
    z = lemma2_scaled_integral(w.scaled(0.0), 8, 8.0, 1.0, 0)[0]
    assert z == 0.0
    with pytest.raises(ValueError):
        lemma2_scaled_integral(w, 4, 8.0, 1.0, 0)


@settings(max_examples=25, deadline=None)
@given(
    t=st.floats(0.01, 1.0),
    n=st.integers(1, 32),
    which=st.sampled_from(["power:r=2", "logpower:gamma=2", "power:r=0.5"]),
)
def test_positivity_property(t, n, which):
    assert psi_tail_sine(parse_psi(which), n, t) > 0


@settings(max_examples=25, deadline=None)
@given(a=st.floats(1.0, 6.0), s=st.floats(1.0, 3.0), i=st.sampled_from([0, 1]), k=st.integers(1, 10))
def test_find_zero_property(a, s, i, k):
    z = find_S_zero(a, s, i, k)
    lo, hi = z.interval
    assert lo <= z.zero <= hi and z.residual <= 1e-10
