"""Generators psi, moduli of continuity omega and their classification.

A generator ``psi`` is a positive, decreasing, convex function on ``[1, inf)``
tending to zero.  The modulus of half-decay ``mu(psi; t) = t / (eta(t) - t)``
with ``eta(t) = psi^{-1}(psi(t) / 2)`` sorts generators into the families

* ``M0``  -- ``mu`` bounded above,
* ``MC``  -- ``mu`` bounded above and away from zero,
* ``M'``  -- ``int_1^inf psi(t)/t dt`` finite whenever ``sin(beta*pi/2) != 0``.

Shapes are immutable and all evaluations are pure.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "DomainError",
    "PsiShape",
    "Modulus",
    "ClassReport",
    "builtin_psi",
    "builtin_omega",
    "psi_from_callable",
    "parse_psi",
    "parse_omega",
    "half_decay_eta",
    "half_decay_mu",
    "classify",
    "tail_integral_bound_check",
    "check_psi_shape",
    "check_modulus",
    "geometric_grid",
    "sin_half_beta",
]

MC_RATIO_THRESHOLD = 10.0
M0_TAIL_GROWTH = 2.0


class DomainError(ValueError):
    """Raised when a value falls outside the representable range of a shape."""


def sin_half_beta(beta: float) -> float:
    """``sin(beta*pi/2)`` with exact zeros at even integers."""
    r = math.remainder(beta, 4.0)
    if r == 0.0 or abs(r) == 2.0:
        return 0.0
    if r == 1.0:
        return 1.0
    if r == -1.0:
        return -1.0
    return math.sin(r * math.pi / 2)


def cos_half_beta(beta: float) -> float:
    """``cos(beta*pi/2)`` with exact zeros at odd integers."""
    return sin_half_beta(beta + 1.0)


def geometric_grid(lo: float, hi: float, num: int = 200) -> np.ndarray:
    return np.geomspace(lo, hi, num)


@dataclass(frozen=True)
class PsiShape:
    """A convex decreasing generator ``psi(t)``, ``t >= 1``.

    ``eval``, ``deriv_plus``, ``deriv2`` and ``inverse`` accept scalars or
    numpy arrays.  ``tail_integral(n)`` returns ``int_n^inf psi(t)/t dt``
    (``inf`` when divergent).
    """

    eval: Callable
    deriv_plus: Callable
    inverse: Callable
    tail_integral: Callable[[float], float]
    label: str
    deriv2: Optional[Callable] = None
    spec: str = ""
    log_eval: Optional[Callable] = None

    def __call__(self, t):
        return self.eval(t)

    def at_log(self, x):
        """``psi(exp(x))``, overflow-free when ``log_eval`` is supplied."""
        if self.log_eval is not None:
            return self.log_eval(x)
        return self.eval(np.exp(x))

    def second_derivative(self, t):
        if self.deriv2 is not None:
            return self.deriv2(t)
        h = np.asarray(t, dtype=float) * 1e-4
        return (self.deriv_plus(t + h) - self.deriv_plus(t)) / h


@dataclass(frozen=True)
class Modulus:
    """A modulus of continuity ``omega(t)``, ``t >= 0``."""

    eval: Callable
    deriv_plus: Callable
    concave_flag: bool
    label: str
    spec: str = ""
    log_eval: Optional[Callable] = None

    def __call__(self, t):
        return self.eval(t)

    def at_log_inv(self, x):
        """``omega(exp(-x))``, underflow-free when ``log_eval`` is supplied."""
        if self.log_eval is not None:
            return self.log_eval(x)
        return self.eval(np.exp(-np.asarray(x, dtype=float)))

    def scaled(self, c: float) -> "Modulus":
        f, d, g = self.eval, self.deriv_plus, self.log_eval
        return Modulus(
            eval=lambda t: c * f(t),
            deriv_plus=lambda t: c * d(t),
            concave_flag=self.concave_flag,
            label=f"{c:g}*{self.label}",
            spec="",
            log_eval=None if g is None else (lambda x: c * g(x)),
        )


# ---------------------------------------------------------------- builtins


def _num(x: float) -> str:
    """Shortest round-trip text of ``x``, without a trailing ``.0``."""
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def _log1p_exp(x):
    """``ln(1 + e^x)`` without overflow."""
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _power_psi(r: float) -> PsiShape:
    def tail(n):
        return float(n) ** (-r) / r

    return PsiShape(
        eval=lambda t: np.power(t, -r) if isinstance(t, np.ndarray) else float(t) ** (-r),
        deriv_plus=lambda t: -r * np.power(t, -r - 1.0),
        deriv2=lambda t: r * (r + 1.0) * np.power(t, -r - 2.0),
        inverse=lambda y: np.power(y, -1.0 / r),
        tail_integral=tail,
        label=f"t^-{r:g}",
        spec=f"power:r={_num(r)}",
        log_eval=lambda x: np.exp(-r * np.asarray(x, dtype=float)),
    )


def _logpower_psi(gamma: float) -> PsiShape:
    g = gamma

    def ev(t):
        return np.log1p(t) ** (-g)

    def d1(t):
        L = np.log1p(t)
        return -g * L ** (-g - 1.0) / (1.0 + t)

    def d2(t):
        L = np.log1p(t)
        return g * L ** (-g - 2.0) * (L + g + 1.0) / (1.0 + t) ** 2

    def inv(y):
        y = np.asarray(y, dtype=float)
        x = y ** (-1.0 / g)
        if np.any(x > 700.0):
            raise DomainError(f"psi^-1({y}) overflows for ln^-{g:g}(t+1)")
        out = np.expm1(x)
        return float(out) if out.ndim == 0 else out

    def tail(n):
        if g <= 1.0:
            return math.inf
        head = math.log1p(n) ** (1.0 - g) / (g - 1.0)
        rest, _ = integrate.quad(lambda t: ev(t) / (t * (t + 1.0)), n, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
        return head + rest

    return PsiShape(
        eval=ev, deriv_plus=d1, deriv2=d2, inverse=inv, tail_integral=tail,
        label=f"ln^-{g:g}(t+1)", spec=f"logpower:gamma={_num(g)}",
        log_eval=lambda x: _log1p_exp(x) ** (-g),
    )


def _power_omega(alpha: float) -> Modulus:
    a = alpha

    def ev(t):
        return np.power(np.maximum(t, 0.0), a)

    def d(t):
        return a * np.power(t, a - 1.0)

    return Modulus(
        eval=ev, deriv_plus=d, concave_flag=a <= 1.0, label=f"t^{a:g}", spec=f"omega-power:alpha={_num(a)}",
        log_eval=lambda x: np.exp(-a * np.asarray(x, dtype=float)),
    )


def _loginv_omega(alpha: float) -> Modulus:
    a = alpha

    def ev(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(t > 0, np.log1p(1.0 / np.where(t > 0, t, 1.0)) ** (-a), 0.0)
        return float(out) if out.ndim == 0 else out

    def d(t):
        t = np.asarray(t, dtype=float)
        L = np.log1p(1.0 / t)
        return a * L ** (-a - 1.0) / (t * (1.0 + t))

    return Modulus(
        eval=ev, deriv_plus=d, concave_flag=True, label=f"ln^-{a:g}(1/t+1)", spec=f"omega-loginv:alpha={_num(a)}",
        log_eval=lambda x: _log1p_exp(x) ** (-a),
    )


def builtin_psi(kind: str, param: float) -> PsiShape:
    """Built-in generators: ``power`` (``t^-r``) and ``logpower`` (``ln^-gamma(t+1)``)."""
    if not (isinstance(param, (int, float)) and math.isfinite(param) and param > 0):
        raise ValueError(f"{kind} parameter must be a positive finite number, got {param!r}")
    if kind == "power":
        return _power_psi(float(param))
    if kind == "logpower":
        return _logpower_psi(float(param))
    raise ValueError(f"unknown psi kind {kind!r}")


def builtin_omega(kind: str, param: float) -> Modulus:
    """Built-in moduli: ``power`` (``t^alpha``) and ``loginv`` (``ln^-alpha(1/t+1)``), ``alpha in (0, 1]``."""
    if not (isinstance(param, (int, float)) and 0.0 < param <= 1.0):
        raise ValueError(f"omega parameter must lie in (0, 1], got {param!r}")
    if kind == "power":
        return _power_omega(float(param))
    if kind == "loginv":
        return _loginv_omega(float(param))
    raise ValueError(f"unknown omega kind {kind!r}")


def _doubling_log_integral(g: Callable[[float], float], x0: float, rtol: float = 1e-9, max_doublings: int = 60):
    """``int_{x0}^inf g(x) dx`` over doubling intervals; returns (value, converged)."""
    total = 0.0
    lo, width = x0, 1.0
    for _ in range(max_doublings):
        if lo + width > 700.0:
            break
        piece, _ = integrate.quad(g, lo, lo + width, epsabs=0.0, epsrel=1e-12, limit=200)
        total += piece
        if abs(piece) <= rtol * abs(total):
            return total, True
        lo += width
        width *= 2.0
    return total, False


def psi_from_callable(func: Callable, label: str = "custom") -> PsiShape:
    """Wrap an arbitrary decreasing convex ``psi`` with numerical inverse and derivatives."""

    def d1(t):
        t = np.asarray(t, dtype=float)
        h = t * 1e-6
        return (func(t + h) - func(t)) / h

    def inv(y):
        def one(yv):
            if not 0.0 < yv <= func(1.0):
                raise DomainError(f"{yv} outside (0, psi(1)]")
            hi = 2.0
            while func(hi) > yv:
                hi *= 2.0
                if hi > 1e300:
                    raise DomainError(f"psi^-1({yv}) not representable")
            return optimize.brentq(lambda t: func(t) - yv, 1.0, hi, xtol=1e-300, rtol=4e-16, maxiter=500)

        y = np.asarray(y, dtype=float)
        if y.ndim == 0:
            return one(float(y))
        return np.array([one(v) for v in y.ravel()]).reshape(y.shape)

    def tail(n):
        val, ok = _doubling_log_integral(lambda x: func(math.exp(x)), math.log(n))
        return val if ok else math.inf

    return PsiShape(eval=func, deriv_plus=d1, inverse=inv, tail_integral=tail, label=label, spec="")


_SPEC_RE = re.compile(r"^\s*([a-z-]+)\s*:\s*([a-z]+)\s*=\s*([^\s]+)\s*$")
_PSI_KEYS = {"power": "r", "logpower": "gamma"}
_OMEGA_KEYS = {"omega-power": ("power", "alpha"), "omega-loginv": ("loginv", "alpha")}


def _parse(text: str):
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"malformed shape spec {text!r}")
    kind, key, raw = m.groups()
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"non-numeric parameter in {text!r}") from None
    return kind, key, value


def parse_psi(text: str) -> PsiShape:
    """Parse ``"power:r=2"`` or ``"logpower:gamma=2"``."""
    kind, key, value = _parse(text)
    if _PSI_KEYS.get(kind) != key:
        raise ValueError(f"unknown psi spec {text!r}")
    return builtin_psi(kind, value)


def parse_omega(text: str) -> Modulus:
    """Parse ``"omega-power:alpha=0.5"`` or ``"omega-loginv:alpha=1"``."""
    kind, key, value = _parse(text)
    if kind not in _OMEGA_KEYS or _OMEGA_KEYS[kind][1] != key:
        raise ValueError(f"unknown omega spec {text!r}")
    return builtin_omega(_OMEGA_KEYS[kind][0], value)


# ------------------------------------------------------------ half decay


def half_decay_eta(psi: PsiShape, t: float) -> float:
    y = float(psi(t)) / 2.0
    if not (y > 0.0 and math.isfinite(y)):
        raise DomainError(f"psi({t})/2 = {y} is not invertible")
    try:
        eta = float(psi.inverse(y))
    except (OverflowError, FloatingPointError) as exc:
        raise DomainError(str(exc)) from exc
    if not math.isfinite(eta) or eta <= t:
        raise DomainError(f"eta({t}) = {eta} is not a valid half-decay point")
    return eta


def half_decay_mu(psi: PsiShape, t: float) -> float:
    return t / (half_decay_eta(psi, t) - t)


# -------------------------------------------------------------- checks


def check_psi_shape(psi: PsiShape, lo: float = 1.0, hi: float = 1e8, num: int = 200, rtol: float = 1e-10) -> dict:
    """Monotonicity, convexity and inverse round trip on a geometric grid."""
    t = geometric_grid(lo, hi, num)
    v = np.asarray(psi(t), dtype=float)
    decreasing = bool(np.all(np.diff(v) < 0)) and bool(v[-1] < v[0] * 1e-1 or v[-1] < 1.0)
    mid = np.asarray(psi((t[:-2] + t[2:]) / 2), dtype=float)
    avg = (v[:-2] + v[2:]) / 2
    convex = bool(np.all(mid <= avg * (1 + 1e-12)))
    back = np.array([psi.inverse(float(y)) for y in v])
    roundtrip = float(np.max(np.abs(back - t) / t))
    return {"decreasing": decreasing, "convex": convex, "roundtrip_err": roundtrip, "ok": decreasing and convex and roundtrip <= rtol}


def check_modulus(omega: Modulus, lo: float = 1e-8, hi: float = 10.0, num: int = 200) -> dict:
    t = geometric_grid(lo, hi, num)
    v = np.asarray(omega(t), dtype=float)
    zero = float(omega(0.0)) == 0.0
    nondecreasing = bool(np.all(np.diff(v) >= 0))
    s = np.asarray(omega(t[:, None] + t[None, :]), dtype=float)
    subadditive = bool(np.all(s <= (v[:, None] + v[None, :]) * (1 + 1e-12)))
    mid = np.asarray(omega((t[:-2] + t[2:]) / 2), dtype=float)
    concave = bool(np.all(mid >= (v[:-2] + v[2:]) / 2 * (1 - 1e-12)))
    ok = zero and nondecreasing and subadditive and (concave or not omega.concave_flag)
    return {"zero": zero, "nondecreasing": nondecreasing, "subadditive": subadditive, "concave": concave, "ok": ok}


# ------------------------------------------------------------ classify


@dataclass(frozen=True)
class ClassReport:
    mu_min: float
    mu_max: float
    in_M0: bool
    in_MC: bool
    in_Mprime: bool
    integral_finite: bool
    integral_value: Optional[float]
    inconclusive: bool = False
    mc_threshold: float = MC_RATIO_THRESHOLD
    notes: tuple = field(default_factory=tuple)


def classify(psi: PsiShape, beta: float, t_max: float = 1e6, num: int = 200) -> ClassReport:
    """Sample ``mu(psi; t)`` on ``[1, t_max]`` and decide class membership.

    ``in_MC`` is declared when ``mu_max / mu_min <= 10`` over the grid; ``in_M0``
    when ``mu`` is positive and the last decade shows no growth beyond a factor 2.
    """
    notes = []
    inconclusive = t_max < 1e6
    if inconclusive:
        notes.append("grid shorter than 1e6; slow decay of mu cannot be resolved")
    t = geometric_grid(1.0, t_max, num)
    mu = []
    for tv in t:
        try:
            mu.append(half_decay_mu(psi, float(tv)))
        except DomainError as exc:
            notes.append(f"domain error at t={tv:g}: {exc}")
            inconclusive = True
            break
    mu = np.array(mu)
    if mu.size == 0 or not np.all(np.isfinite(mu)) or np.any(mu <= 0):
        in_M0 = False
    else:
        split = np.searchsorted(t[: mu.size], t[mu.size - 1] / 10.0)
        head = mu[: max(split, 1)].max()
        tail = mu[split:].max() if split < mu.size else head
        in_M0 = bool(tail <= M0_TAIL_GROWTH * head) and mu.size == t.size
    mu_min = float(mu.min()) if mu.size else math.nan
    mu_max = float(mu.max()) if mu.size else math.nan
    in_MC = bool(in_M0 and mu_max / mu_min <= MC_RATIO_THRESHOLD)
    shape = check_psi_shape(psi, 1.0, min(t_max, 1e8), 60, rtol=1e-6) if not inconclusive else {"decreasing": True, "convex": True}
    in_M = bool(shape["decreasing"] and shape["convex"])
    value = psi.tail_integral(1.0)
    finite = bool(math.isfinite(value))
    in_Mprime = bool(in_M and (sin_half_beta(beta) == 0.0 or finite))
    return ClassReport(
        mu_min=mu_min, mu_max=mu_max, in_M0=in_M0 and in_M, in_MC=in_MC and in_M,
        in_Mprime=in_Mprime, integral_finite=finite, integral_value=value if finite else None,
        inconclusive=inconclusive, notes=tuple(notes),
    )


def tail_integral_bound_check(psi: PsiShape, n: int) -> tuple[float, float]:
    """``(int_n^inf psi(t)/t dt, ratio to psi(n))``."""
    value = psi.tail_integral(float(n))
    if not math.isfinite(value):
        raise ArithmeticError(f"int_n^inf psi(t)/t dt diverges for {psi.label}")
    return value, value / float(psi(float(n)))
