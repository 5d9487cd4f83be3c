import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from psibeta.extremal import (
    DegenerateAlternationWarning,
    ExtremalSpec,
    alternation_count,
    alternation_value,
    dvp_lower_bound,
    dvp_main_term,
    export_witness_csv,
    f_star,
    f_star_coefficients,
    membership_check,
    orthogonality_check,
    phi_n_eval,
    phi_n_sine_coefficients,
)
from psibeta.linear_method import apply_U_psi
from psibeta.shapes import Modulus, parse_omega, parse_psi
from psibeta.trig import psi_beta_derivative

P2 = parse_psi("power:r=2")
PL = parse_psi("logpower:gamma=2")
WSQ = parse_omega("omega-power:alpha=0.5")
WLIN = parse_omega("omega-power:alpha=1")
WLOG = parse_omega("omega-loginv:alpha=1")

# sum_{m odd} psi(4m) b_{4m}, m <= 401  [oracle: alternation_magnitude]
ALT_P2_SQRT_N4 = 0.027858433834843252
ALT_P2_LIN_N4 = 0.019674426732055307


def _nonconcave():
    # max(t/2, min(t, 1/2)): subadditive, flat on [1/2, 1], so not concave
    ev = lambda t: np.maximum(np.asarray(t, dtype=float) / 2, np.minimum(t, 0.5))
    d = lambda t: np.where(np.asarray(t) < 0.5, 1.0, np.where(np.asarray(t) < 1.0, 0.0, 0.5))
    return Modulus(eval=ev, deriv_plus=d, concave_flag=False, label="kink")


def test_c_omega_selection():
    assert ExtremalSpec(4, WSQ, P2, 1.0).c_omega == 1.0
    assert ExtremalSpec(4, _nonconcave(), P2, 1.0).c_omega == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        ExtremalSpec(4, WSQ, P2, 1.0, c_omega=2 / 3)
    with pytest.raises(ValueError):
        ExtremalSpec(1, WSQ, P2, 1.0)


def test_phi_examples():
    s = ExtremalSpec(5, WSQ, P2, 1.0)
    assert phi_n_eval(s, 0.0) == 0.0
    assert phi_n_eval(s, math.pi / 10) == pytest.approx(0.5 * math.sqrt(math.pi / 5))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 20), i=st.integers(-10, 10), t=st.floats(-4, 4))
def test_phi_antiperiodic(n, i, t):
    s = ExtremalSpec(n, WLOG, PL, 1.0)
    P = math.pi / n
    x = i * P + t
    t = x - i * P
    eps = np.finfo(float).eps * max(1.0, abs(x))
    # offsets below a few ulp of x are not resolvable
    assume(t == 0.0 or abs(t) >= 32 * eps)
    # forward error of reducing x: omega'(2|t|) times a few ulp
    tol = 1e-12 + (8 * eps * float(WLOG.deriv_plus(2 * abs(t))) if t else 0.0)
    assert abs(phi_n_eval(s, x) - (-1) ** i * phi_n_eval(s, t)) <= tol


@pytest.mark.parametrize("omega", [WSQ, WLOG, _nonconcave()], ids=["sqrt", "log", "kink"])
def test_membership(omega):
    for n in (2, 4, 9):
        assert membership_check(ExtremalSpec(n, omega, P2, 1.0)) <= 1e-12


@pytest.mark.parametrize("n", [2, 4, 7])
def test_orthogonality(n):
    s = ExtremalSpec(n, WSQ, P2, 1.0)
    for k in range(1, n):
        assert abs(orthogonality_check(s, k)) <= 1e-10
    assert abs(orthogonality_check(s, n)) > 1e-3


@pytest.mark.parametrize("omega", [WSQ, WLOG, _nonconcave()], ids=["sqrt", "log", "kink"])
def test_orthogonality_dual_route(omega):
    # graded Gauss panels vs QAWO sine coefficient at k = n
    s = ExtremalSpec(8, omega, P2, 1.0)
    assert orthogonality_check(s, 8) == pytest.approx(math.pi * phi_n_sine_coefficients(s, 8)[7], abs=1e-12)


def test_sine_coefficients_pattern():
    s = ExtremalSpec(4, WLIN, P2, 1.0)
    b = phi_n_sine_coefficients(s, 64)
    nz = np.flatnonzero(b) + 1
    assert set(nz) <= {4 * m for m in range(1, 17, 2)}
    # |b_{nm}| <= 4 c omega(pi/n) / (pi m)
    m = nz / 4
    assert np.all(np.abs(b[nz - 1]) <= 4 * WLIN(math.pi / 4) / (math.pi * m) + 1e-15)


def test_f_star_dual_route_and_round_trip():
    s = ExtremalSpec(4, WSQ, P2, 1.0)
    fs = f_star(s)
    assert fs.route_gap <= 1e-6
    assert fs.poly.a0 == 0.0
    back = psi_beta_derivative(fs.poly, P2, 1.0)
    b = phi_n_sine_coefficients(s, s.default_order)
    assert np.max(np.abs(back.b - b)) <= 1e-8 and np.max(np.abs(back.a)) <= 1e-8


def test_alternation_frozen():
    s = ExtremalSpec(4, WLIN, P2, 1.0)
    assert dvp_lower_bound(s) == pytest.approx(ALT_P2_LIN_N4, abs=1e-9)
    s = ExtremalSpec(4, WSQ, P2, 1.0)
    _, bound = f_star_coefficients(s)
    assert abs(dvp_lower_bound(s) - ALT_P2_SQRT_N4) <= bound
    assert dvp_lower_bound(s, order=1604) == pytest.approx(ALT_P2_SQRT_N4, abs=1e-12)


def test_alternation_signs_and_direct_route():
    s = ExtremalSpec(4, WLIN, P2, 1.0)
    vals = [alternation_value(s, i) for i in range(8)]
    for v, w in zip(vals, vals[1:]):
        assert v * w < 0 and abs(abs(v) - abs(w)) <= 1e-10
    fs, _ = f_star_coefficients(s)
    rem = fs - apply_U_psi(fs, P2, 4)
    t = np.arange(8) * math.pi / 4
    assert np.max(np.abs(rem(t) - np.array(vals))) <= 1e-6


def test_alternation_zero_for_even_beta():
    s = ExtremalSpec(4, WSQ, P2, 0.0)
    assert alternation_value(s, 0) == 0.0 and alternation_value(s, 3) == 0.0
    with pytest.warns(DegenerateAlternationWarning):
        assert dvp_lower_bound(ExtremalSpec(4, WSQ, P2, 2.0)) == 0.0


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("n", [2, 4, 8])
def test_alternation_count(beta, n):
    assert alternation_count(ExtremalSpec(n, WLOG, PL, beta)) == 2 * n


def test_dvp_main_term_residual_bounded():
    res = []
    for n in (4, 8, 16, 32, 64):
        s = ExtremalSpec(n, WSQ, P2, 1.0)
        res.append((dvp_lower_bound(s) - dvp_main_term(s)) / (float(P2(n)) * float(WSQ(1 / n))))
    assert max(res) - min(res) < 1e-3 and max(abs(r) for r in res) < 2


def test_export_csv(tmp_path):
    s = ExtremalSpec(3, WSQ, P2, 1.0)
    path = tmp_path / "w.csv"
    export_witness_csv(s, path, N=64)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "phi_n", "f_star", "remainder"] and len(rows) == 65
    assert float(rows[1][1]) == 0.0
