import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psibeta.linear_method import (
    MultiplierSet,
    TauKernel,
    apply_U_lambda,
    apply_U_psi,
    decay_certificate,
    direct_remainder,
    identity_multipliers,
    lambda_psi,
    psi_multipliers,
    remainder_via_representation,
    tau_eval,
    tau_hat,
    zero_mean_integral,
)
from psibeta.shapes import parse_psi
from psibeta.trig import TrigPoly, psi_beta_antiderivative

import oracles

P1 = parse_psi("power:r=1")
P2 = parse_psi("power:r=2")
PL = parse_psi("logpower:gamma=2")


def test_lambda_examples():
    assert lambda_psi(P2, 5, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert lambda_psi(P2, 2, 0.5) == pytest.approx(15 / 16, rel=1e-15)
    assert lambda_psi(PL, 7, 0.0) == 1.0


def test_multipliers_match_profile():
    m = psi_multipliers(PL, 6)
    k = np.arange(1, 7)
    assert np.allclose(m.lambdas, m.profile(k / 6), atol=1e-15)
    assert m.lambdas[-1] == 0.0
    with pytest.raises(ValueError):
        MultiplierSet(3, [1.0, 1.0], lambda u: u)


def test_apply_U_psi_examples():
    f = TrigPoly(0, [1], [0])
    u = apply_U_psi(f, P2, 4)
    assert u.order == 3 and np.allclose(u.a, [255 / 256, 0, 0])
    f4 = TrigPoly(0, [0, 0, 0, 1], [0, 0, 0, 0])
    assert apply_U_psi(f4, P2, 4).coef_norm() == 0.0
    c = TrigPoly(3.0, [], [])
    assert apply_U_psi(c, P2, 4).a0 == 3.0


def test_apply_U_lambda_examples():
    f = TrigPoly(0.5, [1, 2, 3], [4, 5, 6])
    g = apply_U_lambda(f, identity_multipliers(3))
    assert np.array_equal(g.a, f.a) and np.array_equal(g.b, f.b)
    h = apply_U_lambda(f, psi_multipliers(P2, 3)).truncate(2)
    assert np.allclose(h.a, apply_U_psi(f, P2, 3).a)
    z = apply_U_lambda(TrigPoly.zeros(3), psi_multipliers(P2, 3))
    assert z.coef_norm() == 0.0


def test_tau_eval_examples():
    k = TauKernel(P1, 3)
    assert tau_eval(k, 0.5) == pytest.approx(1 / 12)
    assert tau_eval(k, 1.0) == pytest.approx(1 / 3)
    assert tau_eval(k, 2.0) == pytest.approx(1 / 6)
    assert tau_eval(k, 0.0) == 0.0
    u = np.linspace(1, 10, 50)
    assert np.all(np.diff(tau_eval(k, u)) < 0)
    with pytest.raises(ValueError):
        tau_eval(k, -1.0)


@pytest.mark.parametrize("psi", [P2, PL], ids=["power", "log"])
def test_tau_hat_routes_agree(psi):
    k = TauKernel(psi, 4)
    t = np.geomspace(0.1, 100, 25)
    for beta in (0.0, 0.5, 1.0):
        assert np.max(np.abs(tau_hat(k, beta, t) - tau_hat(k, beta, t, route="direct"))) < 1e-8


def test_tau_hat_mpmath_oracle():
    v = oracles.tau_hat(oracles.psi_power(2), 4, 0.5, 2.5)
    assert tau_hat(TauKernel(P2, 4), 0.5, 2.5) == pytest.approx(v, abs=1e-10)


@pytest.mark.parametrize("beta", [1.0, 3.0, -1.0])
def test_tau_hat_odd_for_odd_beta(beta):
    k = TauKernel(PL, 8)
    t = np.geomspace(0.05, 200, 40)
    assert np.max(np.abs(tau_hat(k, beta, t) + tau_hat(k, beta, -t))) <= 1e-10


def test_decay_certificate_bounded():
    c = decay_certificate(TauKernel(PL, 8), 1.0)
    assert math.isfinite(c) and c < 10


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 1.5])
@pytest.mark.parametrize("n", [2, 4, 8])
def test_zero_mean(beta, n):
    v, bound = zero_mean_integral(TauKernel(P2, n), beta)
    assert abs(v) <= 1e-6 and bound < 1e-6


def test_representation_cosine_example():
    g = TrigPoly(0, [-1], [0])  # (psi, 2)-derivative of cos x for psi = k^-2
    res = remainder_via_representation(g, TauKernel(P2, 4), 2.0, 0.0)
    assert res.value == pytest.approx(1 / 256, abs=1e-6)
    assert res.truncation_bound < 1e-6


def test_representation_identity_variant_vanishes():
    rng = np.random.default_rng(3)
    g = TrigPoly(0, rng.normal(size=3), rng.normal(size=3))
    res = remainder_via_representation(g, TauKernel(P2, 4, variant="identity"), 1.0, np.linspace(0, 6, 5))
    assert np.max(np.abs(res.value)) < 1e-6


def test_representation_callable_route():
    g = TrigPoly(0, [0.3, -0.2], [0.5, 0.1])
    k = TauKernel(P2, 4)
    poly = remainder_via_representation(g, k, 1.0, 0.7)
    call = remainder_via_representation(lambda x: g(x), k, 1.0, 0.7)
    assert abs(poly.value - call.value) <= call.truncation_bound + 1e-8
    assert math.isfinite(call.truncation_bound)


def test_representation_json():
    res = remainder_via_representation(TrigPoly(0, [1], [0]), TauKernel(P2, 2), 1.0, [0.0, 1.0])
    assert '"T"' in res.to_json()


@settings(max_examples=8, deadline=None)
@given(
    a=arrays(np.float64, 8, elements=st.floats(-1, 1)),
    b=arrays(np.float64, 8, elements=st.floats(-1, 1)),
    beta=st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]),
    n=st.sampled_from([2, 3, 4, 8]),
    which=st.sampled_from(["power:r=2", "logpower:gamma=2"]),
)
def test_representation_identity_property(a, b, beta, n, which):
    psi = parse_psi(which)
    g = TrigPoly(0.0, a, b)
    f = psi_beta_antiderivative(g, psi, beta)
    x = np.linspace(-np.pi, np.pi, 16, endpoint=False)
    res = remainder_via_representation(g, TauKernel(psi, n), beta, x)
    assert np.max(np.abs(res.value - direct_remainder(f, psi, n, x))) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 500), which=st.sampled_from(["power:r=2", "power:r=0.5", "logpower:gamma=2"]))
def test_profile_continuity(n, which):
    psi = parse_psi(which)
    u = 1.0 / n
    psin, psi1 = float(psi(float(n))), float(psi(1.0))
    lo = 1.0 - psin / psi1 * u / n
    hi = 1.0 - psin / psi1 * u**2
    assert abs(lo - hi) <= 1e-14
    assert lambda_psi(psi, n, 1.0) == pytest.approx(0.0, abs=1e-15)
