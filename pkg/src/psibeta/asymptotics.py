"""Main term, remainder scale and the diagnostics around the asymptotic estimate

    E_n = theta_n (1/pi) |sin(beta pi/2)| int_0^{1/n} psi(1/t) omega(t)/t dt + O(1) psi(n) omega(1/n).

The integral is evaluated as ``int_{ln n}^inf psi(e^x) omega(e^-x) dx`` over
doubling intervals, which keeps logarithmic families (decaying like a power of
``x``) within reach.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate

from .extremal import ExtremalSpec, dvp_lower_bound, phi_n_eval, phi_n_sine_coefficients
from .oscillatory import QuadratureError, gauss_legendre, psi_tail_sine, si_tail
from .shapes import Modulus, PsiShape, cos_half_beta, sin_half_beta

__all__ = [
    "ApproxReport",
    "ClassificationInconsistency",
    "Corollary1Report",
    "Condition9Report",
    "RemainderComponents",
    "main_integral",
    "main_term",
    "example1_asymptote",
    "corollary1_conditions",
    "condition9_check",
    "order_band",
    "remainder_components",
    "identity_omega2t",
    "approx_report",
    "write_report_csv",
    "CSV_HEADER",
    "CSV_VERSION_LINE",
    "ASYMPTOTIC_GUARD",
]

CSV_VERSION_LINE = "# psibeta-approx v1"
CSV_HEADER = ["n", "main_term", "remainder_scale", "lower", "witness_best", "upper", "theta_bracket", "flags"]
ASYMPTOTIC_GUARD = 10.0


class ClassificationInconsistency(QuadratureError):
    """The main-term integral diverges, so ``psi`` cannot be in the summable family."""


def _doubling(g, x0: float, rtol: float, max_doublings: int = 200, x_cap: float = math.inf):
    """``int_{x0}^inf g`` on doubling intervals with a geometric tail estimate.

    Returns ``(value, tail_estimate, converged)``.
    """
    total, lo, width = 0.0, x0, 1.0
    prev = None
    for _ in range(max_doublings):
        hi = min(lo + width, x_cap)
        piece, _ = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += piece
        if prev is not None and 0 < piece < prev:
            q = piece / prev
            tail = piece * q / (1.0 - q)
            if tail <= rtol * abs(total):
                return total + tail, tail, True
        if hi >= x_cap:
            break
        prev = piece
        lo, width = hi, 2.0 * width
    return total, math.inf, False


def main_integral(psi: PsiShape, omega: Modulus, n: float, rtol: float = 1e-10) -> float:
    """``int_0^{1/n} psi(1/t) omega(t) / t dt``."""
    cap = math.inf if (psi.log_eval is not None and omega.log_eval is not None) else 700.0

    def g(x):
        return float(psi.at_log(x)) * float(omega.at_log_inv(x))

    val, _, ok = _doubling(g, math.log(n), rtol, x_cap=cap)
    if not ok:
        raise ClassificationInconsistency(f"main-term integral did not converge for {psi.label}, {omega.label}")
    return val


def main_term(psi: PsiShape, omega: Modulus, beta: float, n: float) -> float:
    """``(1/pi) |sin(beta pi/2)| int_0^{1/n} psi(1/t) omega(t)/t dt``."""
    s = abs(sin_half_beta(beta))
    if s == 0.0:
        return 0.0
    return s / math.pi * main_integral(psi, omega, n)


def example1_asymptote(gamma: float, alpha: float, beta: float, n: float) -> float:
    """``|sin(beta pi/2)| ln n / (pi (gamma + alpha - 1) ln^{gamma + alpha}(n + 1))``."""
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    s = abs(sin_half_beta(beta))
    return s * math.log(n) / (math.pi * (gamma + alpha - 1.0) * math.log1p(n) ** (gamma + alpha))


# --------------------------------------------------------------- conditions


def _vanishing(r: np.ndarray) -> bool:
    """Decreasing over the upper half of the grid and at most half of the first value."""
    half = r[r.size // 2 :]
    return bool(np.all(np.diff(half) <= 1e-12 * abs(half[0])) and r[-1] <= 0.5 * r[0])


@dataclass(frozen=True)
class Corollary1Report:
    n: np.ndarray
    psi_ratio: np.ndarray
    omega_ratio: np.ndarray
    psi_vanishes: bool
    omega_vanishes: bool

    @property
    def both_vanish(self) -> bool:
        return self.psi_vanishes and self.omega_vanishes


def corollary1_conditions(psi: PsiShape, omega: Modulus, n_grid: Sequence[float]) -> Corollary1Report:
    """``|psi'(n)| n / psi(n)`` and ``omega'(1/n) / (omega(1/n) n)`` on the grid."""
    n = np.asarray(n_grid, dtype=float)
    pr = np.abs(np.asarray(psi.deriv_plus(n), dtype=float)) * n / np.asarray(psi(n), dtype=float)
    orr = np.asarray(omega.deriv_plus(1.0 / n), dtype=float) / (np.asarray(omega(1.0 / n), dtype=float) * n)
    return Corollary1Report(n, pr, orr, _vanishing(pr), _vanishing(orr))


@dataclass(frozen=True)
class Condition9Report:
    n: np.ndarray
    ratio: np.ndarray
    bounded: bool
    divergent: bool
    vacuous: bool


def condition9_check(omega: Modulus, beta: float, n_grid: Sequence[float], max_doublings: int = 40) -> Condition9Report:
    """``int_0^{1/n} omega(t)/t dt / omega(1/n)`` on the grid.

    With ``x = ln(1/t)`` the integral is ``int_{ln n}^inf omega(e^-x) dx``; a
    doubling sequence that fails to settle marks the condition as failed.
    """
    n = np.asarray(n_grid, dtype=float)
    vacuous = sin_half_beta(beta) == 0.0
    ratios = np.empty(n.shape)
    divergent = False
    for j, nv in enumerate(n):
        val, _, ok = _doubling(lambda x: float(omega.at_log_inv(x)), math.log(nv), 1e-10, max_doublings=max_doublings)
        if not ok:
            divergent = True
            ratios[j] = math.inf
        else:
            ratios[j] = val / float(omega(1.0 / nv))
    bounded = bool(not divergent and np.max(ratios) <= 4.0 * np.min(ratios))
    return Condition9Report(n, ratios, bounded or vacuous, divergent, vacuous)


# ------------------------------------------------------------------ J terms


@dataclass(frozen=True)
class RemainderComponents:
    J: np.ndarray
    r_n: float
    scale: float
    truncation: float

    @property
    def ratios(self) -> np.ndarray:
        return self.J / self.scale


def _sin_cos_tail(m: float, u):
    """``int_1^inf sin(m t) cos(u t) / t dt`` for ``m >= 1``, ``u >= 0``."""
    u = np.asarray(u, dtype=float)
    d = m - u
    with np.errstate(invalid="ignore"):
        second = np.where(d == 0, 0.0, np.sign(d) * si_tail(np.where(d == 0, 1.0, np.abs(d))))
    return 0.5 * (si_tail(m + u) + second)


def remainder_components(spec: ExtremalSpec, m_max: int = 255) -> RemainderComponents:
    """``J_1..J_5`` and ``r_n`` for the witness ``delta(t) = phi_n(t)`` at ``x = 0``.

    ``phi_n(t/n) = sum_{m odd} B_m sin(m t)`` with ``B_m = b_{nm}``.  Because the
    witness is odd, ``J_1 = J_2 = 0``; ``J_3`` and ``J_4`` reduce to
    ``int_1^inf sin(mt) cos(ut)/t dt`` integrated against ``2 psi(n) u`` on
    ``[0, 1]`` and ``n psi'(n u)`` on ``[1, inf)``; ``J_5`` is a finite double
    integral.  ``truncation`` is the size of the last retained block of
    harmonics plus a bound on the cut ``u``-tail of ``J_4``.
    """
    n, psi = spec.n, spec.psi
    psin = float(psi(float(n)))
    b = phi_n_sine_coefficients(spec, n * m_max)
    ms = np.arange(1, m_max + 1, 2)
    B = b[n * ms - 1]
    gx, gw = gauss_legendre(64)

    J3_terms = np.array([2 * 2 * psin * np.sum(gw * gx * _sin_cos_tail(m, gx)) for m in ms])

    # J4 on unit Gauss panels over [1, U]; the jumps of S_m sit on panel edges
    U = float(max(4096, 4 * m_max))
    ux = (np.arange(1.0, U)[:, None] + gx[None, :]).ravel()
    uw = np.tile(gw, int(U) - 1)
    dpsi = n * np.asarray(psi.deriv_plus(n * ux), dtype=float) * uw
    J4_terms = np.empty(ms.size)
    for j, m in enumerate(ms):
        J4_terms[j] = 2.0 * np.dot(dpsi, _sin_cos_tail(float(m), ux))
    J3 = float(np.sum(B * J3_terms))
    J4 = float(np.sum(B * J4_terms))
    # |S_m(u)| <= 4/u for u >= 2m, and int_U^inf n |psi'(nu)| / u du <= psi(nU) / U
    tail = 8.0 * float(np.sum(np.abs(B))) * float(psi(n * U)) / U
    last = ms.size // 8
    truncation = float(abs(np.sum((B * (J3_terms + J4_terms))[-last:]))) + tail

    # J5 = int_{-1}^{1} phi_n(t/n) psi(n) int_0^1 u^2 sin(ut) du dt = 2 int_0^1 (...)
    edges = np.concatenate([[0.0], np.geomspace(1e-10, 1.0, 24)])
    tx = (edges[:-1, None] + np.diff(edges)[:, None] * gx[None, :]).ravel()
    tw = (np.diff(edges)[:, None] * gw[None, :]).ravel()
    inner = psin * (gw[None, :] * gx[None, :] ** 2 * np.sin(np.multiply.outer(tx, gx))).sum(-1)
    J5 = float(2.0 * np.sum(tw * phi_n_eval(spec, tx / n) * inner))

    J = np.array([0.0, 0.0, J3, J4, J5])
    c, s = cos_half_beta(spec.beta), sin_half_beta(spec.beta)
    r_n = c / math.pi * (J[0] + J[1]) - s / math.pi * (J[2] + J[3] + J[4])
    scale = psin * float(spec.omega(1.0 / n))
    return RemainderComponents(J, r_n, scale, truncation)


# ------------------------------------------------------------------ identity


def _omega2t_lhs(psi: PsiShape, omega: Modulus, n: int, order: int = 48) -> float:
    gx, gw = gauss_legendre(order)
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 28)])
    t = (edges[:-1, None] + np.diff(edges)[:, None] * gx[None, :]).ravel()
    w = (np.diff(edges)[:, None] * gw[None, :]).ravel()
    inner = psi_tail_sine(psi, n, t, check_positive=False)
    return float(np.sum(w * np.asarray(omega(2 * t / n)) * inner))


def identity_omega2t(psi: PsiShape, omega: Modulus, n: int) -> tuple[float, float, float]:
    """``lhs = int_0^1 omega(2t/n) int_1^inf psi(nu) sin(ut) du dt`` against ``int_0^{1/n} psi(1/t) omega(t)/t dt``.

    Returns ``(lhs, rhs_main, (lhs - rhs_main) / (psi(n) omega(1/n)))``.
    """
    scale = float(psi(float(n))) * float(omega(1.0 / n))
    if scale == 0.0:
        return 0.0, 0.0, 0.0
    lhs = _omega2t_lhs(psi, omega, n)
    rhs = main_integral(psi, omega, n)
    return lhs, rhs, (lhs - rhs) / scale


# ------------------------------------------------------------------- bands


def order_band(psi: PsiShape, omega: Modulus, beta: float, n_grid: Sequence[int], tol: float = 1e-9):
    """``(K1_est, K2_est)``: min and max of ``E_n(f*) / (psi(n) omega(1/n))`` over the grid."""
    from .best_approx import remez_best
    from .extremal import f_star_coefficients

    ratios = []
    for n in n_grid:
        scale = float(psi(float(n))) * float(omega(1.0 / n))
        if scale <= 0.0:
            raise ValueError("degenerate band: zero remainder scale")
        spec = ExtremalSpec(int(n), omega, psi, beta)
        poly, _ = f_star_coefficients(spec)
        ratios.append(remez_best(poly, int(n), tol=tol).distance / scale)
    r = np.array(ratios)
    if not np.all(np.isfinite(r)) or np.min(r) <= 0.0:
        raise ValueError("degenerate band: nonpositive witness distance")
    return float(r.min()), float(r.max())


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class ApproxReport:
    n: int
    main_term: float
    remainder_scale: float
    lower: float
    witness_best: float
    upper: float
    theta_bracket: float
    flags: tuple = field(default_factory=tuple)

    def row(self) -> list[str]:
        nums = [self.main_term, self.remainder_scale, self.lower, self.witness_best, self.upper, self.theta_bracket]
        return [str(self.n)] + [f"{v:.17g}" for v in nums] + [";".join(self.flags)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "main_term": self.main_term,
            "remainder_scale": self.remainder_scale,
            "lower": self.lower,
            "witness_best": self.witness_best,
            "upper": self.upper,
            "theta_bracket": None if math.isnan(self.theta_bracket) else self.theta_bracket,
            "flags": list(self.flags),
        }


def approx_report(psi: PsiShape, omega: Modulus, beta: float, n: int, tol: float = 1e-9) -> ApproxReport:
    """One bracket row.

    ``theta_bracket = (lower - C_est psi(n) omega(1/n)) / main_term`` is filled
    only in the asymptotic regime ``main_term / remainder_scale >= 10``.
    """
    from .best_approx import en_bracket

    br = en_bracket(ExtremalSpec(n, omega, psi, beta), tol=tol)
    flags = []
    flags.append("ordered" if br.ordered else "ORDER_VIOLATION")
    if not br.certificate.converged:
        flags.append("remez_not_converged")
    if sin_half_beta(beta) == 0.0:
        flags.append("degenerate_beta")
    theta = math.nan
    if br.main_term > 0 and br.main_term / br.remainder_scale >= ASYMPTOTIC_GUARD:
        theta = (br.lower - br.C_est * br.remainder_scale) / br.main_term
        flags.append("asymptotic_regime")
    return ApproxReport(n, br.main_term, br.remainder_scale, br.lower, br.witness_best, br.upper, theta, tuple(flags))


def write_report_csv(rows: Iterable[ApproxReport], out) -> None:
    """Versioned CSV; ``out`` is a path or a text stream."""
    own = isinstance(out, (str, bytes)) or hasattr(out, "__fspath__")
    fh = open(out, "w", newline="") if own else out
    try:
        fh.write(CSV_VERSION_LINE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.row())
    finally:
        if own:
            fh.close()
