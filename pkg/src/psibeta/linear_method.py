"""The linear method ``U_{n-1}^psi`` and its integral representation.

``U_{n-1}^psi`` keeps the harmonics ``k < n`` of ``f`` and scales the k-th pair by

    1 - (psi(n) / psi(k)) * (k / n)^2,

which are the values at ``u = k/n`` of the profile ``lambda^psi(u)``.  The
remainder ``f - U_{n-1}^psi f`` equals

    int (g(x + t/n) - g(x)) tau_hat(t) dt,        g = (psi, beta)-derivative of f,

where ``tau_hat`` is the cosine-phase Fourier transform of

    tau_n(u) = psi(n) u^2  (0 <= u <= 1),     psi(n u)  (u >= 1).

Everything reduces to the complex spectrum ``E(t) = int_0^inf tau_n(u) e^{iut} du``
for ``t > 0``; ``tau_hat(t) = Re(e^{i beta pi/2} E(t)) / pi`` and ``E(-t)`` is
the conjugate of ``E(t)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .oscillatory import QuadratureError, exp_integral_tail, fourier_tail, gauss_legendre
from .shapes import PsiShape, cos_half_beta, sin_half_beta
from .trig import TrigPoly

__all__ = [
    "MultiplierSet",
    "TauKernel",
    "RepresentationResult",
    "lambda_psi",
    "psi_multipliers",
    "identity_multipliers",
    "apply_U_psi",
    "apply_U_lambda",
    "direct_remainder",
    "tau_eval",
    "tau_hat",
    "zero_mean_integral",
    "remainder_via_representation",
    "decay_certificate",
]


# ---------------------------------------------------------------- multipliers


def lambda_psi(psi: PsiShape, n: int, u):
    """Continuous profile ``lambda^psi_n(u)`` on ``[0, 1]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = np.asarray(u, dtype=float)
    psin, psi1 = float(psi(float(n))), float(psi(1.0))
    lo = 1.0 - psin / psi1 * u / n
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = 1.0 - psin / np.asarray(psi(np.maximum(n * u, 1.0)), dtype=float) * u**2
    out = np.where(u <= 1.0 / n, lo, hi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MultiplierSet:
    """Row ``n`` of a triangular multiplier matrix with its continuous profile.

    ``lambdas[k-1]`` is the multiplier of the k-th harmonic pair, ``k = 1..n``;
    ``lambda_0 = 1`` is implicit.  ``kind`` is ``"psi"`` or ``"identity"``.
    """

    n: int
    lambdas: np.ndarray
    profile: Callable
    kind: str = "custom"

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).ravel()
        if lam.size != self.n:
            raise ValueError("need exactly n multipliers")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)


def psi_multipliers(psi: PsiShape, n: int) -> MultiplierSet:
    """Multipliers of ``U_{n-1}^psi`` (``lambda_n = 0``)."""
    k = np.arange(1, n + 1, dtype=float)
    lam = 1.0 - float(psi(float(n))) / np.asarray(psi(k), dtype=float) * (k / n) ** 2
    lam[-1] = 0.0
    return MultiplierSet(n, lam, lambda u: lambda_psi(psi, n, u), kind="psi")


def identity_multipliers(n: int) -> MultiplierSet:
    return MultiplierSet(n, np.ones(n), lambda u: np.ones_like(np.asarray(u, dtype=float)), kind="identity")


def apply_U_lambda(f: TrigPoly, m: MultiplierSet) -> TrigPoly:
    """``a0/2 + sum_{k<=n} lambda_k (a_k cos kx + b_k sin kx)``."""
    g = f.padded(m.n).truncate(m.n)
    return TrigPoly(f.a0, g.a * m.lambdas, g.b * m.lambdas)


def apply_U_psi(f: TrigPoly, psi: PsiShape, n: int) -> TrigPoly:
    """``U_{n-1}^psi(f)``: order ``n - 1`` polynomial."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return apply_U_lambda(f, psi_multipliers(psi, n)).truncate(n - 1)


def direct_remainder(f: TrigPoly, psi: PsiShape, n: int, x):
    return f(x) - apply_U_psi(f, psi, n)(x)


# --------------------------------------------------------------------- tau_n


@dataclass(frozen=True)
class TauKernel:
    """``tau_n`` for the psi-method (``variant="psi"``) or the identity multipliers.

    The identity variant vanishes on ``[0, 1]`` and is discontinuous at 1; it
    is kept for the trivial case of the representation.
    """

    psi: PsiShape
    n: int
    variant: str = "psi"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.variant not in ("psi", "identity"):
            raise ValueError(f"unknown tau variant {self.variant!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def psin(self) -> float:
        return float(self.psi(float(self.n)))

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("tau_n is defined for u >= 0")
        head = self.psin * u**2 if self.variant == "psi" else np.zeros_like(u)
        tail = np.asarray(self.psi(self.n * np.maximum(u, 1.0)), dtype=float)
        out = np.where(u <= 1.0, head, tail)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    # derivatives of h(u) = psi(n u) at u = 1
    def _h_derivs(self) -> tuple[float, float, float, float]:
        n, psi = float(self.n), self.psi
        h0 = self.psin
        h1 = n * float(psi.deriv_plus(n))
        h2 = n * n * float(psi.second_derivative(n))
        d = 1e-3 * n
        h3 = n**3 * (float(psi.second_derivative(n + d)) - float(psi.second_derivative(n - d))) / (2 * d)
        return h0, h1, h2, h3

    def asymptotic_coefficients(self):
        """``E(t) = e^{it} sum alpha_p (it)^{-p} + sum beta_p (it)^{-p} + R(t)`` for ``p = 1..3``.

        Returns ``(alpha, beta, c4)`` with ``|R(t)| <= c4 / t^4`` (valid when
        ``psi'''`` keeps one sign, as for completely monotone ``psi``).
        """
        h0, h1, h2, h3 = self._h_derivs()
        if self.variant == "psi":
            p = self.psin
            head1, head0 = (p, 2 * p, 2 * p), (0.0, 0.0, 2 * p)
        else:
            head1, head0 = (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)
        hh = (h0, h1, h2)
        alpha = np.array([(-1) ** m * (head1[m] - hh[m]) for m in range(3)])
        beta = np.array([-((-1) ** m) * head0[m] for m in range(3)])
        return alpha, beta, 2.0 * abs(h3)

    def _head(self, t: np.ndarray) -> np.ndarray:
        """``int_0^1 tau_n(u) e^{iut} du``."""
        if self.variant == "identity":
            return np.zeros(t.shape, dtype=complex)
        out = np.empty(t.shape, dtype=complex)
        small = t < 1.0
        if np.any(small):
            gx, gw = gauss_legendre(32)
            out[small] = (gw * gx**2 * np.exp(1j * np.multiply.outer(t[small], gx))).sum(-1)
        big = ~small
        if np.any(big):
            tb = t[big]
            it = 1j * tb
            A = 1 / it - 2 / it**2 + 2 / it**3
            out[big] = np.exp(it) * A - 2 / it**3
        return self.psin * out

    def spectrum(self, t, route: str = "ibp", return_error: bool = False):
        """``E(t) = int_0^inf tau_n(u) e^{iut} du`` for ``t > 0``.

        ``route="ibp"`` integrates the ``[1, inf)`` part by parts once and
        applies the panel/Euler quadrature to ``n psi'(n u) e^{iut}``;
        ``route="direct"`` uses QUADPACK's Fourier integrator on ``psi(n u)``.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t <= 0):
            raise ValueError("spectrum needs t > 0")
        n, psi = self.n, self.psi
        head = self._head(t)
        if route == "ibp":
            d, err = fourier_tail(lambda u: n * psi.deriv_plus(n * u), t, a=1.0, panels=40, return_error=True)
            it = 1j * t
            tail = -self.psin * np.exp(it) / it - d / it
            err = err / t
        elif route == "direct":
            tail = np.empty(t.shape, dtype=complex)
            err = np.empty(t.shape)
            for j, tv in enumerate(t):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    c, ec = integrate.quad(lambda u: float(psi(n * (u + 1.0))), 0.0, np.inf, weight="cos", wvar=tv, limlst=200, epsabs=1e-13)
                    s, es = integrate.quad(lambda u: float(psi(n * (u + 1.0))), 0.0, np.inf, weight="sin", wvar=tv, limlst=200, epsabs=1e-13)
                tail[j] = np.exp(1j * tv) * (c + 1j * s)
                err[j] = ec + es
        else:
            raise ValueError(f"unknown route {route!r}")
        out = head + tail
        return (out, err) if return_error else out

    def _rep_nodes(self, T: float, eps: float = 1e-10, order: int = 16):
        """Gauss nodes/weights on ``[eps, 1]`` (dyadic grading) and ``[1, T]`` (unit panels), with cached spectrum."""
        key = ("nodes", float(T), eps, order)
        if key not in self._cache:
            gx, gw = gauss_legendre(order)
            m = int(math.ceil(math.log2(1.0 / eps)))
            graded = np.geomspace(eps, 1.0, m + 1)
            edges = np.concatenate([graded, np.arange(2.0, math.floor(T) + 1.0)])
            if edges[-1] < T:
                edges = np.append(edges, T)
            left, width = edges[:-1], np.diff(edges)
            t = (left[:, None] + width[:, None] * gx[None, :]).ravel()
            w = (width[:, None] * gw[None, :]).ravel()
            E, err = self.spectrum(t, return_error=True)
            self._cache[key] = (t, w, E, float(np.sum(w * err)))
        return self._cache[key]


def tau_eval(k: TauKernel, u):
    return k.eval(u)


def tau_hat(k: TauKernel, beta: float, t, route: str = "ibp"):
    """``(1/pi) int_0^inf tau_n(u) cos(u t + beta pi/2) du``.

    ``t = 0`` is evaluated directly and is finite only when ``tau_n`` is
    integrable or ``cos(beta pi/2) = 0``.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(tt.shape)
    c, s = cos_half_beta(beta), sin_half_beta(beta)
    nz = tt != 0
    if np.any(nz):
        E = k.spectrum(np.abs(tt[nz]), route=route)
        E = np.where(tt[nz] > 0, E, np.conj(E))
        out[nz] = (c * E.real - s * E.imag) / math.pi
    if np.any(~nz):
        if c == 0.0:
            out[~nz] = 0.0
        else:
            integral = k.psin / 3.0 if k.variant == "psi" else 0.0
            rest, _ = integrate.quad(lambda u: float(k.psi(k.n * u)), 1.0, np.inf, limit=400)
            if not math.isfinite(rest) or rest > 1e12:
                raise QuadratureError("tau_n is not integrable; tau_hat(0) diverges")
            out[~nz] = c * (integral + rest) / math.pi
    return float(out[0]) if np.ndim(t) == 0 else out


# ------------------------------------------------------------- integrals


def _tail_real_integral(alpha, beta_c, sigma_phase: complex, T: float) -> float:
    """``int_T^inf Re(sigma * E_asym(t)) dt``."""
    total = 0.0 + 0.0j
    for p in (1, 2, 3):
        a, b = alpha[p - 1], beta_c[p - 1]
        if a != 0.0:
            total += a * (1j) ** (-p) * exp_integral_tail(1.0, T, p)
        if b != 0.0:
            if p == 1:
                raise QuadratureError("non-oscillating 1/t term in tau_hat")
            total += b * (1j) ** (-p) * T ** (1 - p) / (p - 1)
    return float((sigma_phase * total).real)


def zero_mean_integral(k: TauKernel, beta: float, T: float = 1e3) -> tuple[float, float]:
    """Truncation-corrected ``int_{-inf}^{inf} tau_hat(t) dt``; returns ``(value, bound)``.

    Only the cosine part survives the symmetric integration:
    ``(2 cos(beta pi/2) / pi) int_0^inf C(t) dt`` with ``C = Re E``.  The piece
    over ``[0, 1]`` is rewritten by Fubini as ``int_0^inf tau_n(u) sin(u)/u du``,
    ``[1, T]`` uses the cached spectrum and ``[T, inf)`` the asymptotic expansion.
    """
    c = cos_half_beta(beta)
    if c == 0.0:
        return 0.0, 0.0
    n, psi = k.n, k.psi
    head = k.psin * (math.sin(1.0) - math.cos(1.0)) if k.variant == "psi" else 0.0
    head += float(fourier_tail(lambda u: psi(n * u) / u, 1.0, a=1.0, panels=48).imag)
    t, w, E, qerr = k._rep_nodes(T)
    on = t >= 1.0
    mid = float(np.sum(w[on] * E[on].real))
    alpha, beta_c, c4 = k.asymptotic_coefficients()
    tail = _tail_real_integral(alpha, beta_c, 1.0, T)
    value = 2.0 * c / math.pi * (head + mid + tail)
    bound = 2.0 * abs(c) / math.pi * (c4 / (3 * T**3) + qerr)
    return value, bound


@dataclass(frozen=True)
class RepresentationResult:
    value: np.ndarray
    truncation_bound: float
    quadrature_error: float
    T: float

    def to_json(self) -> str:
        v = np.atleast_1d(self.value)
        return json.dumps(
            {
                "value": [float(x) for x in v],
                "truncation_bound": self.truncation_bound,
                "quadrature_error": self.quadrature_error,
                "T": self.T,
            }
        )


def _complex_terms(g: TrigPoly):
    """``g(y) - a0/2 = Re sum_j c_j exp(i k_j y)``."""
    return g.k.astype(float), g.a - 1j * g.b


def _asymptotic_terms(k: TauKernel, sigma: complex, side: float):
    """Terms ``(y, rho, p)`` of ``sigma * E(side * t)`` ~ ``sum y e^{i rho t} t^-p`` for ``t > 0``."""
    alpha, beta_c, _ = k.asymptotic_coefficients()
    out = []
    for p in (1, 2, 3):
        for coef, rho in ((alpha[p - 1], 1.0), (beta_c[p - 1], 0.0)):
            if coef == 0.0:
                continue
            z = coef * (1j) ** (-p)
            if side > 0:
                out.append((sigma * z, rho, p))
            else:
                out.append((sigma * np.conj(z), -rho, p))
    return out


def _ep(nu: np.ndarray, T: float, p: int) -> np.ndarray:
    if p == 1 and np.any(np.abs(nu) < 1e-14):
        raise QuadratureError("representation integral diverges (harmonic on the jump of tau_n)")
    return np.atleast_1d(exp_integral_tail(nu, T, p))


def _trig_tail(g: TrigPoly, k: TauKernel, sigma: complex, xs: np.ndarray, T: float) -> np.ndarray:
    """``int_{|t| >= T} (g(x + t/n) - g(x)) tau_hat_asym(t) dt`` in closed form, for each ``x``."""
    kk, cc = _complex_terms(g)
    d = cc[None, :] * np.exp(1j * np.multiply.outer(xs, kk))
    acc = np.zeros(xs.shape)
    for side in (1.0, -1.0):
        nu = side * kk / k.n
        for y, rho, p in _asymptotic_terms(k, sigma, side):
            # Re(X) Re(Y) = (Re(X Y) + Re(X conj Y)) / 2
            w = y * (_ep(nu + rho, T, p) - _ep(np.array([rho]), T, p))
            w = w + np.conj(y) * (_ep(nu - rho, T, p) - _ep(np.array([-rho]), T, p))
            acc += 0.5 * (d @ w).real
    return acc / math.pi


def remainder_via_representation(
    f_deriv,
    k: TauKernel,
    beta: float,
    x,
    T: Optional[float] = None,
) -> RepresentationResult:
    """``int (g(x + t/n) - g(x)) tau_hat(t) dt`` with ``g = f_deriv``.

    The line is cut at ``|t| = T`` (default ``max(1e3, 100 n)``).  For a
    :class:`TrigPoly` the tail beyond ``T`` is integrated exactly against the
    asymptotic expansion of ``tau_hat`` and only its ``t^-4`` remainder enters
    the bound; for other callables the tail is bounded, not added.
    The window ``|t| < 1e-10`` is dropped; there the integrand is bounded by
    ``2 psi(n) sup|g'| / (pi n)``.
    """
    n = k.n
    T = float(T) if T is not None else max(1e3, 100.0 * n)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    t, w, E, qerr = k._rep_nodes(T)
    sigma = complex(cos_half_beta(beta), sin_half_beta(beta))
    hat_pos = (sigma * E).real / math.pi
    hat_neg = (sigma * np.conj(E)).real / math.pi
    _, _, c4 = k.asymptotic_coefficients()
    if isinstance(f_deriv, TrigPoly):
        kk, cc = _complex_terms(f_deriv)
        d = cc[None, :] * np.exp(1j * np.multiply.outer(xs, kk))
        shift = np.exp(1j * np.multiply.outer(kk / n, t)) - 1.0
        # g(x + t/n) - g(x) = Re(d @ shift); the shift for -t is its conjugate
        wp, wn = w * hat_pos, w * hat_neg
        values = (d @ (shift @ wp)).real + (d @ (np.conj(shift) @ wn)).real
        values = values + _trig_tail(f_deriv, k, sigma, xs, T)
        gsup = f_deriv.coef_norm()
        bound = 2.0 * 2.0 * gsup * c4 / (3.0 * math.pi * T**3)
    else:
        values = np.empty(xs.shape)
        for j, xv in enumerate(xs):
            g0 = float(f_deriv(xv))
            body = (np.asarray(f_deriv(xv + t / n)) - g0) * hat_pos + (np.asarray(f_deriv(xv - t / n)) - g0) * hat_neg
            values[j] = float(np.sum(w * body))
        gsup = float(np.max(np.abs(f_deriv(np.linspace(0.0, 2 * np.pi, 4097)))))
        env = sum(abs(y) / ((p - 1) * T ** (p - 1)) if p > 1 else math.inf for y, _, p in _asymptotic_terms(k, sigma, 1.0))
        bound = 2.0 * 2.0 * gsup * (env + c4 / (3 * T**3)) / math.pi
    qe = float(qerr * 2 * 2 * gsup / math.pi)
    return RepresentationResult(values if np.ndim(x) else values[0], float(bound), qe, T)


def decay_certificate(k: TauKernel, beta: float, t_lo: float = 10.0, t_hi: float = 1e3, num: int = 200) -> float:
    """``max t^2 |tau_hat(t)|`` over a geometric grid of ``[t_lo, t_hi]``.

    A bounded value is the numerical stand-in for summability of ``tau_hat``.
    """
    t = np.geomspace(t_lo, t_hi, num)
    return float(np.max(t**2 * np.abs(tau_hat(k, beta, t))))
