"""Oscillatory quadrature primitives.

The workhorse is :func:`panel_euler`: an integral over ``[a, inf)`` of a
function that oscillates with a known half period is cut into half-period
panels, each panel is integrated by Gauss-Legendre on geometrically graded
sub-panels, and the alternating sequence of partial sums is accelerated by
repeated averaging (Euler transform).  :func:`fourier_tail` specialises this to
``int_a^inf h(u) exp(i*omega*u) du`` for many frequencies at once.

The module also carries the machinery around the auxiliary function

    S(x) = int_x^inf (1/t) int_0^a u^s sin(u t + i pi/2) du dt,

its guaranteed zeros, finite oscillatory moments, the positive tail-sine
transform of ``psi`` and the scaled witness integral bounded by ``16*pi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .shapes import Modulus, PsiShape

__all__ = [
    "QuadratureError",
    "NoSignChangeError",
    "panel_euler",
    "fourier_tail",
    "si_tail",
    "cos_over_t2_tail",
    "exp_integral_tail",
    "finite_moment",
    "unit_moment",
    "S_function",
    "S_direct",
    "ZeroBracket",
    "find_S_zero",
    "psi_tail_sine",
    "lemma2_scaled_integral",
    "gauss_legendre",
]


class QuadratureError(ArithmeticError):
    """A quadrature did not reach its tolerance."""


class NoSignChangeError(ArithmeticError):
    def __init__(self, msg, left_value, right_value):
        super().__init__(msg)
        self.left_value = left_value
        self.right_value = right_value


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[0, 1]``."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = ((x + 1.0) / 2.0, w / 2.0)
    return _GL_CACHE[order]


def _euler_limit(partial: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Euler-accelerated limit of alternating partial sums (last axis)."""
    K = partial.shape[-1]
    m = min(m, K - 2)
    c = special.comb(m, np.arange(m + 1)) / 2.0**m
    est = partial[..., K - m - 1:] @ c
    prev = partial[..., K - m - 2:K - 1] @ c
    return est, np.abs(est - prev)


def panel_euler(
    F: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: np.ndarray | float,
    half_period: np.ndarray | float,
    panels: int = 40,
    order: int = 16,
    max_ratio: float = 1.5,
    euler: int | None = None,
    chunk_nodes: int = 2_000_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``F(u, case)`` over ``[a, inf)`` for a batch of cases.

    ``F`` receives a 2-D array of abscissae and a matching array of case
    indices.  Case ``j`` uses panel edges ``a_j + k * half_period_j``.  Returns
    the accelerated values and an error estimate (difference of the last two
    Euler windows).
    """
    hp = np.atleast_1d(np.asarray(half_period, dtype=float))
    a = np.broadcast_to(np.asarray(a, dtype=float), hp.shape)
    if np.any(a <= 0):
        raise ValueError("panel_euler needs a > 0 (geometric sub-panels)")
    x, w = gauss_legendre(order)
    m = euler if euler is not None else panels // 2
    K = panels
    values = np.empty(hp.size, dtype=complex)
    errors = np.empty(hp.size)
    ratio_log = math.log(max_ratio)

    per_case = K * order * 4
    step = max(1, chunk_nodes // per_case)
    for lo in range(0, hp.size, step):
        sl = slice(lo, min(lo + step, hp.size))
        hps, As = hp[sl], a[sl]
        n = hps.size
        edges = As[:, None] + np.arange(K + 1)[None, :] * hps[:, None]
        left, right = edges[:, :-1].ravel(), edges[:, 1:].ravel()
        nsub = np.maximum(1, np.ceil(np.log(right / left) / ratio_log)).astype(int)
        pid = np.repeat(np.arange(n * K), nsub)
        first = np.cumsum(nsub) - nsub
        s = np.arange(pid.size) - first[pid]
        q = right[pid] / left[pid]
        ns = nsub[pid]
        sl_ = left[pid] * q ** (s / ns)
        sr_ = left[pid] * q ** ((s + 1) / ns)
        # the last sub-panel must end exactly on the panel edge
        sr_ = np.where(s + 1 == ns, right[pid], sr_)
        width = sr_ - sl_
        u = sl_[:, None] + width[:, None] * x[None, :]
        case = (pid // K)[:, None] + lo
        vals = F(u, np.broadcast_to(case, u.shape)) @ w * width
        psum = np.bincount(pid, weights=vals.real, minlength=n * K) + 1j * np.bincount(
            pid, weights=np.imag(vals), minlength=n * K
        )
        partial = np.cumsum(psum.reshape(n, K), axis=1)
        est, err = _euler_limit(partial, m)
        values[sl] = est
        errors[sl] = err
    return values, errors


def fourier_tail(
    h: Callable[[np.ndarray], np.ndarray],
    omega,
    a: float = 1.0,
    panels: int = 40,
    order: int = 16,
    return_error: bool = False,
):
    """``int_a^inf h(u) exp(i*omega*u) du`` for each ``omega > 0``.

    ``h`` must be smooth and eventually monotone on ``[a, inf)``; absolute
    integrability is not required.
    """
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om <= 0):
        raise ValueError("omega must be positive")

    def F(u, case):
        return h(u) * np.exp(1j * om[case] * u)

    val, err = panel_euler(F, a, math.pi / om, panels=panels, order=order)
    if np.ndim(omega) == 0:
        val, err = val[0], err[0]
    return (val, err) if return_error else val


# ------------------------------------------------------------ elementary tails


def si_tail(x):
    """``int_x^inf sin(t)/t dt = pi/2 - Si(x)`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("si_tail requires x > 0")
    si, _ = special.sici(x)
    out = np.pi / 2 - si
    if np.any(np.abs(out) * x > 2.0 + 1e-12):
        raise ArithmeticError("|int_x^inf sin t/t dt| <= 2/x violated")
    return float(out) if out.ndim == 0 else out


def cos_over_t2_tail(x):
    """``int_x^inf cos(t)/t^2 dt = cos(x)/x - int_x^inf sin(t)/t dt``."""
    x = np.asarray(x, dtype=float)
    return np.cos(x) / x - si_tail(x)


def exp_integral_tail(nu, T: float, p: int):
    """``int_T^inf exp(i*nu*t) / t^p dt`` for integer ``p >= 1`` (``p >= 2`` if ``nu == 0``)."""
    nu = np.asarray(nu, dtype=float)
    out = np.empty(nu.shape, dtype=complex)
    zero = nu == 0
    if np.any(zero):
        if p < 2:
            raise ValueError("divergent integral for nu = 0, p = 1")
        out[zero] = T ** (1 - p) / (p - 1)
    nz = ~zero
    if np.any(nz):
        v = nu[nz]
        si, ci = special.sici(np.abs(v) * T)
        e = -ci + 1j * np.sign(v) * (np.pi / 2 - si)
        for q in range(2, p + 1):
            e = np.exp(1j * v * T) / ((q - 1) * T ** (q - 1)) + 1j * v / (q - 1) * e
        out[nz] = e
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------- moments


def finite_moment(a: float, s: float, i: int, t: float) -> float:
    """``int_0^a u^s sin(u t + i pi/2) du``; asserts the bound ``2 a^s / t``."""
    if i not in (0, 1):
        raise ValueError("i must be 0 or 1")
    val, _ = integrate.quad(lambda u: u**s, 0.0, a, weight="sin" if i == 0 else "cos", wvar=t, epsabs=1e-15, epsrel=1e-13, limit=400)
    if t > 0 and abs(val) > 2 * a**s / t * (1 + 1e-12):
        raise ArithmeticError(f"moment bound violated: |{val}| > 2 a^s / t")
    return val


def unit_moment(s: int, t):
    """Closed form ``int_0^1 u^s exp(i u t) du = exp(i t) A(t) + B(t)`` for integer ``s``.

    Returns ``(A, B)``; both are non-oscillatory in ``t``.
    """
    t = np.asarray(t, dtype=float)
    it = 1j * t
    A = np.zeros(t.shape, dtype=complex)
    coef = 1.0
    for j in range(s + 1):
        A += (-1) ** j * coef / it ** (j + 1)
        coef *= s - j
    B = -((-1) ** s) * math.factorial(s) / it ** (s + 1)
    return A, B


def _cos_power_integral(p: float, X: float) -> float:
    """``int_0^X u^p cos u du``."""
    if p == 0:
        return math.sin(X)
    if float(p).is_integer():
        A, B = unit_moment(int(p), X)
        return float(X ** (p + 1) * np.real(np.exp(1j * X) * A + B))
    with warnings.catch_warnings():
        # QAWO flags roundoff once the 1e-15 target is reached
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda u: u**p, 0.0, X, weight="cos", wvar=1.0, epsabs=1e-15, epsrel=1e-14, limit=400)
    return val


def S_function(a: float, s: float, x: float, i: int = 0) -> float:
    """The auxiliary function ``S(x)`` in closed (integrated-by-parts) form.

    For ``i = 0``::

        S(x) = (-a^{s+1} int_{ax}^inf cos t / t^2 dt + s x^{-(s+1)} int_0^{ax} u^{s-1} cos u du) / (s+1)

    and for ``i = 1`` the analogue ``(-a^{s+1} Ci(ax) + x^{-(s+1)} int_0^{ax} u^s cos u du) / (s+1)``.
    """
    if x <= 0:
        raise ValueError("x must be positive")
    X = a * x
    if i == 0:
        return (-(a ** (s + 1)) * float(cos_over_t2_tail(X)) + s / x ** (s + 1) * _cos_power_integral(s - 1, X)) / (s + 1)
    if i == 1:
        _, ci = special.sici(X)
        return (-(a ** (s + 1)) * ci + _cos_power_integral(s, X) / x ** (s + 1)) / (s + 1)
    raise ValueError("i must be 0 or 1")


def S_direct(a: float, s: float, x: float, i: int = 0) -> float:
    """``S(x)`` by direct quadrature of the order-swapped double integral."""
    if i == 0:
        inner = lambda u: u**s * si_tail(u * x) if u > 0 else 0.0
        brk = None
    else:
        inner = lambda u: -(u**s) * special.sici(u * x)[1] if u > 0 else 0.0
        brk = None
    val, _ = integrate.quad(inner, 0.0, a, epsabs=1e-14, epsrel=1e-12, limit=400, points=brk)
    return val


@dataclass(frozen=True)
class ZeroBracket:
    k: int
    i: int
    a: float
    s: float
    interval: tuple[float, float]
    zero: float
    residual: float
    endpoint_signs: tuple[int, int]


def find_S_zero(a: float, s: float, i: int, k: int, tol: float = 1e-10) -> ZeroBracket:
    """A sign-verified zero of ``S`` in ``((2k-1+i) pi/(2a), (2k+1+i) pi/(2a))``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lo = (2 * k - 1 + i) * math.pi / (2 * a)
    hi = (2 * k + 1 + i) * math.pi / (2 * a)
    f = lambda x: S_function(a, s, x, i)
    flo, fhi = f(lo), f(hi)
    left, right = lo, hi
    if np.sign(flo) == np.sign(fhi):
        # an even number of crossings is still possible; scan for one
        xs = np.linspace(lo, hi, 65)[1:-1]
        vs = np.array([f(v) for v in xs])
        pts = np.concatenate(([lo], xs, [hi]))
        vals = np.concatenate(([flo], vs, [fhi]))
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if idx.size == 0:
            raise NoSignChangeError(f"no sign change of S on ({lo}, {hi})", flo, fhi)
        left, right = pts[idx[0]], pts[idx[0] + 1]
    z = optimize.brentq(f, left, right, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    res = abs(f(z))
    if res > tol:
        raise QuadratureError(f"zero residual {res} exceeds {tol}")
    return ZeroBracket(k, i, a, s, (lo, hi), z, res, (int(np.sign(flo)), int(np.sign(fhi))))


# ------------------------------------------------------------- psi transforms


def psi_tail_sine(psi: PsiShape, n: float, t, check_positive: bool = True):
    """``int_1^inf psi(n u) sin(u t) du`` for ``t in (0, 1]``."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt <= 0):
        raise ValueError("t must be positive")
    val, err = fourier_tail(lambda u: psi(n * u), tt, a=1.0, panels=48, return_error=True)
    out = val.imag
    if check_positive and np.any(out <= 0):
        raise ArithmeticError(f"tail-sine transform not positive: {out[out <= 0]}")
    return float(out[0]) if np.ndim(t) == 0 else out


def lemma2_scaled_integral(omega: Modulus, n: int, a: float, s: float, i: int) -> tuple[float, float]:
    """Witness integral ``int_{|t|>=1} delta(t/n) t^{-1} int_0^{a/n} u^s sin(u t + i pi/2) du dt``.

    The witness is the extremal envelope ``delta(t) = omega(|t|)`` for ``i = 0``
    and its odd counterpart ``sign(t) omega(|t|)`` for ``i = 1``, so that both
    halves of the line contribute equally.  Returns ``(value, value / omega(1/n))``.
    """
    if not 1 <= a <= n:
        raise ValueError("need 1 <= a <= n")
    if i not in (0, 1):
        raise ValueError("i must be 0 or 1")
    b = a / n
    phase = np.exp(0.5j * math.pi * i)
    w_scale = float(omega(1.0 / n))
    if w_scale == 0.0:
        return 0.0, 0.0
    # after tau = b t:  2 b^{s+1} int_b^inf omega(tau/a) m_s(tau) / tau dtau
    if float(s).is_integer():
        s_int = int(s)
        head = 0.0
        c = max(b, 1.0)
        if b < 1.0:
            gx, gw = gauss_legendre(32)

            def m_small(tau):
                return np.sum(gw * gx**s_int * np.sin(gx * tau + 0.5 * math.pi * i))

            head, _ = integrate.quad(lambda tau: float(omega(tau / a)) * m_small(tau) / tau, b, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)

        def h(u):
            A, _ = unit_moment(s_int, u)
            return omega(u / a) * A * phase / u

        osc = fourier_tail(h, 1.0, a=c, panels=48).imag

        def smooth(u):
            _, B = unit_moment(s_int, u)
            return float(omega(u / a)) * float(np.imag(phase * B)) / u

        flat, _ = integrate.quad(smooth, c, np.inf, epsabs=1e-15, epsrel=1e-12, limit=400)
        total = head + osc + flat
    else:
        gx, gw = gauss_legendre(128)

        def F(u, case):
            m = (gw * gx**s * np.sin(gx[None, None, :] * u[..., None] + 0.5 * math.pi * i)).sum(-1)
            return omega(u / a) * m / u

        total = float(panel_euler(F, b, math.pi, panels=48)[0][0].real)
    value = 2.0 * b ** (s + 1) * total
    return value, value / w_scale
