import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psibeta.best_approx import Bracket, calibrate_C, en_bracket, remez_best
from psibeta.extremal import ExtremalSpec, dvp_lower_bound, f_star_coefficients
from psibeta.shapes import parse_omega, parse_psi
from psibeta.trig import TrigPoly

P2 = parse_psi("power:r=2")
PL = parse_psi("logpower:gamma=2")
WSQ = parse_omega("omega-power:alpha=0.5")
WLOG = parse_omega("omega-loginv:alpha=1")


def poisson(r):
    return lambda x: (1 - r * r) / (1 - 2 * r * np.cos(x) + r * r)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_cos_nx(n):
    res = remez_best(lambda x: np.cos(n * x), n)
    assert res.distance == pytest.approx(1.0, abs=1e-9) and res.converged


def test_shifted_harmonic_norm():
    f = lambda x: 3 * np.cos(4 * x) - 4 * np.sin(4 * x) + np.cos(x) - 2
    assert remez_best(f, 4).distance == pytest.approx(5.0, abs=1e-9)


def test_polynomial_input_is_exact():
    p = TrigPoly(0.4, [1.0, -0.5, 0.25], [0.3, 0.0, 2.0])
    assert remez_best(p, 4).distance <= 1e-10


@pytest.mark.parametrize("r", [0.3, 0.5])
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_poisson_kernel_closed_form(r, n):
    # classical: E_n of the Poisson kernel is 2 r^n / (1 - r^2)
    assert remez_best(poisson(r), n).distance == pytest.approx(2 * r**n / (1 - r * r), rel=1e-8)


def test_monotone_in_n():
    d = [remez_best(poisson(0.6), n).distance for n in range(1, 9)]
    assert np.all(np.diff(d) < 0)


def test_certificate_levels_alternate():
    res = remez_best(poisson(0.5), 4, tol=1e-10)
    assert res.levels.size == 8 and res.spread <= 1e-10
    assert np.all(np.sign(res.levels[1:]) != np.sign(res.levels[:-1]))
    assert np.all(np.diff(res.references) > 0)


def test_bad_n():
    with pytest.raises(ValueError):
        remez_best(np.cos, 0)


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("shapes", [(P2, WSQ), (PL, WLOG)], ids=["power", "log"])
def test_witness_at_least_dvp(n, shapes):
    psi, omega = shapes
    spec = ExtremalSpec(n, omega, psi, 1.0)
    fs, _ = f_star_coefficients(spec)
    assert dvp_lower_bound(spec) <= remez_best(fs, n).distance + 1e-8


@settings(max_examples=15, deadline=None)
@given(a=arrays(np.float64, 3, elements=st.floats(-2, 2)), b=arrays(np.float64, 3, elements=st.floats(-2, 2)), a0=st.floats(-2, 2))
def test_invariant_under_polynomial_shift(a, b, a0):
    f = poisson(0.4)
    p = TrigPoly(a0, a, b)
    base = remez_best(f, 4).distance
    assert remez_best(lambda x: f(x) + p(x), 4).distance == pytest.approx(base, rel=1e-8)


def test_bracket_power():
    br = en_bracket(ExtremalSpec(8, WSQ, P2, 1.0))
    assert isinstance(br, Bracket) and br.ordered
    assert br.lower <= br.witness_best + 1e-8 <= br.upper + br.slack + 1e-8
    assert br.C_est >= 0 and br.remainder_scale == pytest.approx(8**-2 * 8**-0.5)
    d = json.loads(br.to_json())
    assert d["lower"] == br.lower and d["certificate"]["converged"]


def test_bracket_even_beta_has_zero_lower():
    br = en_bracket(ExtremalSpec(4, WSQ, P2, 0.0))
    assert br.lower == 0.0 and br.main_term == 0.0 and br.ordered


def test_calibration_is_cached_and_deterministic():
    c1 = calibrate_C(P2, WSQ, 1.0)
    c2 = calibrate_C(P2, WSQ, 1.0)
    assert c1 == c2 and math.isfinite(c1)
