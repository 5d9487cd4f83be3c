"""The lower-bound witness ``phi_n`` and the class member ``f*``.

``phi_n`` is odd and ``2 pi/n``-periodic; on ``[0, pi/n]`` it is the tent

    (c/2) omega(min(2t, 2 pi/n - 2t)),    c = 1 (concave omega) or 2/3.

Its sine coefficients vanish except at ``k = n m`` with ``m`` odd, so the
``(psi, beta)``-antiderivative ``f*`` has no harmonics below ``n``;
``U_{n-1}^psi f*`` is the zero polynomial and the remainder at ``t_i = i pi/n``
is ``f*(t_i) = -(-1)^i sin(beta pi/2) sum_{k>=n} psi(k) b_k``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .linear_method import apply_U_psi
from .oscillatory import gauss_legendre, psi_tail_sine
from .shapes import Modulus, PsiShape, sin_half_beta
from .trig import KernelSpec, SampledFunction, TrigPoly, convolve, psi_beta_antiderivative, uniform_grid

__all__ = [
    "ExtremalSpec",
    "FStar",
    "DegenerateAlternationWarning",
    "phi_n_eval",
    "phi_n_sine_coefficients",
    "orthogonality_check",
    "membership_check",
    "f_star_coefficients",
    "f_star_convolution",
    "f_star",
    "alternation_value",
    "alternation_count",
    "dvp_lower_bound",
    "dvp_main_term",
    "export_witness_csv",
]


class DegenerateAlternationWarning(UserWarning):
    """``sin(beta pi/2) = 0``: the alternation values vanish and the bound is 0."""


@dataclass(frozen=True)
class ExtremalSpec:
    n: int
    omega: Modulus
    psi: PsiShape
    beta: float
    c_omega: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the witness needs n >= 2")
        expected = 1.0 if self.omega.concave_flag else 2.0 / 3.0
        if self.c_omega is None:
            object.__setattr__(self, "c_omega", expected)
        elif self.c_omega != expected:
            raise ValueError(f"c_omega must be {expected} for this modulus")

    @property
    def default_order(self) -> int:
        return max(512, 64 * self.n)


def phi_n_eval(spec: ExtremalSpec, t):
    t = np.asarray(t, dtype=float)
    P = math.pi / spec.n
    r = np.mod(t, 2 * P)
    # snap ulp-level residue at the nodes k pi/n; slow moduli amplify it
    k = np.rint(r / P)
    r = np.where(np.abs(r - k * P) <= 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(t)), np.mod(k, 2) * P, r)
    sign = np.where(r < P, 1.0, -1.0)
    s = np.where(r < P, r, r - P)
    out = sign * 0.5 * spec.c_omega * np.asarray(spec.omega(np.minimum(2 * s, 2 * P - 2 * s)), dtype=float)
    return float(out) if out.ndim == 0 else out


def phi_n_sine_coefficients(spec: ExtremalSpec, order: int) -> np.ndarray:
    """``b_k = (1/pi) int phi_n(t) sin(kt) dt`` for ``k = 1..order``.

    Only ``k = n m`` with odd ``m`` survive:
    ``b_k = (n c / pi) int_0^{pi/n} omega(v) sin(k v / 2) dv``.
    """
    n, c = spec.n, spec.c_omega
    b = np.zeros(order)
    for k in range(n, order + 1, 2 * n):
        with warnings.catch_warnings():
            # QAWO flags roundoff once the 1e-15 target is reached
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(lambda v: float(spec.omega(v)), 0.0, math.pi / n, weight="sin", wvar=k / 2.0, epsabs=1e-15, epsrel=1e-13, limit=400)
        b[k - 1] = n * c / math.pi * val
    return b


def orthogonality_check(spec: ExtremalSpec, k: int) -> float:
    """``int_{-pi}^{pi} phi_n(t) sin(k t) dt`` on the ``4n`` monotone pieces.

    Each piece runs from a node ``j pi/n`` (where ``omega`` may be singular)
    to a peak; Gauss panels are graded geometrically towards the node.
    """
    n, P = spec.n, math.pi / spec.n
    gx, gw = gauss_legendre(20)
    edges = np.concatenate([[0.0], 0.5 * P * 2.0 ** -np.arange(60, -1, -1.0)])
    h = np.diff(edges)
    sv = (edges[:-1, None] + h[:, None] * gx[None, :]).ravel()
    w = (h[:, None] * gw[None, :]).ravel()
    amp = 0.5 * spec.c_omega * np.asarray(spec.omega(2 * sv), dtype=float) * w
    total = 0.0
    for j in range(-n, n + 1):
        sgn = -1.0 if j % 2 else 1.0
        if j < n:
            total += sgn * float(np.sum(amp * np.sin(k * (j * P + sv))))
        if j > -n:
            total -= sgn * float(np.sum(amp * np.sin(k * (j * P - sv))))
    return total


def membership_check(spec: ExtremalSpec, pairs: int = 10_000, seed: int = 0) -> float:
    """Largest ``|phi_n(t') - phi_n(t'')| - omega(|t' - t''|)`` over random pairs (``<= 0`` for membership)."""
    rng = np.random.default_rng(seed)
    P = math.pi / spec.n
    t1 = rng.uniform(-math.pi, math.pi, pairs)
    # half the pairs are close together, where the modulus bites
    d = np.where(rng.random(pairs) < 0.5, rng.uniform(-P, P, pairs), rng.uniform(-math.pi, math.pi, pairs))
    t2 = t1 + d
    return float(np.max(np.abs(phi_n_eval(spec, t1) - phi_n_eval(spec, t2)) - spec.omega(np.abs(d))))


def _coefficient_tail_bound(spec: ExtremalSpec, order: int) -> float:
    """Bound on ``sum_{k > order} psi(k) |b_k|`` from ``|b_{nm}| <= 4 c omega(pi/n) / (pi m)``."""
    n = spec.n
    m0 = order // n + 1
    if m0 % 2 == 0:
        m0 += 1
    k0 = float(n * m0)
    tail = spec.psi.tail_integral(k0)
    if not math.isfinite(tail):
        return math.inf
    scale = 4.0 * spec.c_omega * n * float(spec.omega(math.pi / n)) / math.pi
    return scale * (float(spec.psi(k0)) / k0 + tail / (2 * n))


def f_star_coefficients(spec: ExtremalSpec, order: Optional[int] = None) -> tuple[TrigPoly, float]:
    """Order-``order`` truncation of ``f*`` and a sup-norm bound on the discarded part."""
    K = order or spec.default_order
    b = phi_n_sine_coefficients(spec, K)
    phi = TrigPoly(0.0, np.zeros(K), b)
    return psi_beta_antiderivative(phi, spec.psi, spec.beta), _coefficient_tail_bound(spec, K)


def f_star_convolution(spec: ExtremalSpec, N: int = 2**14) -> SampledFunction:
    """``f*`` on the uniform ``N``-grid as the convolution of ``phi_n`` with ``Psi_beta``."""
    x = uniform_grid(N)
    phi = phi_n_eval(spec, x)
    phi = phi - phi.mean()
    return SampledFunction(convolve(phi, KernelSpec(spec.psi, spec.beta)))


@dataclass(frozen=True)
class FStar:
    poly: TrigPoly
    truncation_bound: float
    samples: SampledFunction
    route_gap: float

    def __call__(self, x):
        return self.poly(x)


def f_star(spec: ExtremalSpec, order: Optional[int] = None, N: int = 2**14, check_points: int = 64) -> FStar:
    """``f*`` by the coefficient route, cross-checked against the convolution route.

    ``route_gap`` is the largest difference of the two routes over
    ``check_points`` equispaced points (which lie on the convolution grid).
    """
    if N % check_points:
        raise ValueError("check_points must divide N")
    poly, bound = f_star_coefficients(spec, order)
    conv = f_star_convolution(spec, N)
    x = uniform_grid(check_points)
    gap = float(np.max(np.abs(poly(x) - conv.values[:: N // check_points])))
    return FStar(poly, bound, conv, gap)


def alternation_value(spec: ExtremalSpec, i: int, order: Optional[int] = None) -> float:
    """Signed remainder ``f*(i pi/n) - U_{n-1}^psi(f*; i pi/n)`` from the coefficient formula.

    Equals ``-(-1)^i sin(beta pi/2) sum_{k>=n} psi(k) b_k``; the overall sign
    comes from the convolution identity for ``f*``.
    """
    K = order or spec.default_order
    b = phi_n_sine_coefficients(spec, K)
    k = np.arange(1, K + 1, dtype=float)
    series = float(np.sum(np.asarray(spec.psi(k), dtype=float) * b))
    return -((-1) ** i) * sin_half_beta(spec.beta) * series


def alternation_count(spec: ExtremalSpec, order: Optional[int] = None) -> int:
    """Strict sign alternations of the actual remainder polynomial over ``t_i = i pi/n``, ``i = 0..2n-1`` (cyclic)."""
    fs, _ = f_star_coefficients(spec, order)
    rem = fs - apply_U_psi(fs, spec.psi, spec.n)
    v = rem(np.arange(2 * spec.n) * math.pi / spec.n)
    return int(np.sum(v * np.roll(v, -1) < 0))


def dvp_lower_bound(spec: ExtremalSpec, order: Optional[int] = None) -> float:
    """``|alternation_value|``: a lower bound for ``E_n(f*)`` by de la Vallee Poussin."""
    if sin_half_beta(spec.beta) == 0.0:
        warnings.warn("sin(beta pi/2) = 0: alternation values vanish", DegenerateAlternationWarning, stacklevel=2)
        return 0.0
    return abs(alternation_value(spec, 0, order))


def dvp_main_term(spec: ExtremalSpec, order: int = 48) -> float:
    """``(c/pi) |sin(beta pi/2)| int_0^1 omega(2t/n) int_1^inf psi(n u) sin(u t) du dt``.

    The ``t``-integral uses Gauss panels graded towards 0.
    """
    s = abs(sin_half_beta(spec.beta))
    if s == 0.0:
        return 0.0
    gx, gw = gauss_legendre(order)
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 28)])
    left, width = edges[:-1], np.diff(edges)
    t = (left[:, None] + width[:, None] * gx[None, :]).ravel()
    w = (width[:, None] * gw[None, :]).ravel()
    inner = psi_tail_sine(spec.psi, spec.n, t, check_positive=False)
    val = float(np.sum(w * np.asarray(spec.omega(2 * t / spec.n)) * inner))
    return spec.c_omega * s / math.pi * val


def export_witness_csv(spec: ExtremalSpec, path, N: int = 1024, order: Optional[int] = None) -> None:
    """Columns ``t, phi_n, f_star, remainder`` on the uniform ``N``-grid."""
    fs, _ = f_star_coefficients(spec, order)
    rem = fs - apply_U_psi(fs, spec.psi, spec.n)
    t = uniform_grid(N)
    cols = (t, phi_n_eval(spec, t), fs(t), rem(t))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "phi_n", "f_star", "remainder"])
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
