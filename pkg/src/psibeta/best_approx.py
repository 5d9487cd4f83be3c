"""Best uniform approximation by trigonometric polynomials of order ``n - 1``.

:func:`remez_best` is a multi-point exchange on the circle: ``2n`` references,
a levelled interpolation of ``2n - 1`` coefficients plus the level ``h``, and a
new reference made of ``2n`` alternating extrema of the error.  On exit the
alternating levels certify optimality from both sides (de la Vallee Poussin
below, the sup norm above).

:func:`en_bracket` assembles ``lower <= E_n(f*) <= upper`` for the witness.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .extremal import ExtremalSpec, dvp_lower_bound, f_star_coefficients
from .shapes import sin_half_beta
from .trig import TrigPoly

__all__ = [
    "BestApproxResult",
    "Bracket",
    "ReferenceCollapse",
    "remez_best",
    "calibrate_C",
    "en_bracket",
    "PILOT_GRID",
]

PILOT_GRID = (3, 6, 12, 24, 48)


class ReferenceCollapse(ArithmeticError):
    """The error curve has fewer than ``2n`` alternating extrema."""


@dataclass(frozen=True)
class BestApproxResult:
    distance: float
    poly: TrigPoly
    references: np.ndarray
    levels: np.ndarray
    iterations: int
    converged: bool

    @property
    def spread(self) -> float:
        """Relative spread of the reference levels."""
        m = np.abs(self.levels)
        return float((m.max() - m.min()) / m.max()) if m.size and m.max() > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "poly": json.loads(self.poly.to_json()),
            "references": self.references.tolist(),
            "levels": self.levels.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _basis(x: np.ndarray, n: int) -> np.ndarray:
    k = np.arange(1, n)
    kx = np.multiply.outer(x, k)
    return np.hstack([0.5 * np.ones((x.size, 1)), np.cos(kx), np.sin(kx)])


def _poly_from(c: np.ndarray, n: int) -> TrigPoly:
    return TrigPoly(c[0], c[1:n], c[n:])


def _alternating_extrema(x: np.ndarray, e: np.ndarray, count: int) -> np.ndarray:
    """Indices of ``count`` cyclically alternating extrema of ``e`` on the grid ``x``."""
    prev, nxt = np.roll(e, 1), np.roll(e, -1)
    s = np.sign(e)
    idx = np.flatnonzero(((e >= prev) & (e >= nxt) & (e > 0)) | ((e <= prev) & (e <= nxt) & (e < 0)))
    if idx.size == 0:
        return idx
    # merge runs of equal sign, keeping the largest (cyclic)
    keep = []
    for i in idx:
        if keep and s[keep[-1]] == s[i]:
            if abs(e[i]) > abs(e[keep[-1]]):
                keep[-1] = i
        else:
            keep.append(i)
    if len(keep) > 1 and s[keep[0]] == s[keep[-1]]:
        if abs(e[keep[-1]]) > abs(e[keep[0]]):
            keep[0] = keep[-1]
        keep.pop()
    keep = list(keep)
    # drop adjacent pairs around the smallest extremum until count remain
    while len(keep) > count:
        m = len(keep)
        j = int(np.argmin(np.abs(e[keep])))
        left, right = (j - 1) % m, (j + 1) % m
        other = left if abs(e[keep[left]]) < abs(e[keep[right]]) else right
        for r in sorted({j, other}, reverse=True):
            keep.pop(r)
    return np.array(sorted(keep), dtype=int)


def _refine(f: Callable, p: TrigPoly, x0: np.ndarray, sign: np.ndarray, h: float, rounds: int = 7, pts: int = 17):
    """Zoom search for the extrema of ``sign * (f - p)`` near ``x0``, all at once.

    Each round samples ``pts`` points in ``[x - h, x + h]`` around the current
    best and shrinks ``h`` by ``(pts - 1) / 2``.
    """
    x = x0.copy()
    off = np.linspace(-1.0, 1.0, pts)
    for _ in range(rounds):
        X = x[:, None] + h * off[None, :]
        E = sign[:, None] * (np.asarray(f(X.ravel()), dtype=float).reshape(X.shape) - p(X.ravel()).reshape(X.shape))
        x = X[np.arange(x.size), np.argmax(E, axis=1)]
        h *= 2.0 / (pts - 1)
    return x


def remez_best(
    f: Callable,
    n: int,
    tol: float = 1e-9,
    grid: Optional[int] = None,
    max_iter: int = 100,
) -> BestApproxResult:
    """Best approximation of ``f`` by trigonometric polynomials of order ``n - 1``.

    Parameters
    ----------
    f : callable
        Vectorised ``2 pi``-periodic function.
    n : int
        ``E_n`` index; the approximant has ``2n - 1`` coefficients.
    tol : float
        Target relative spread of the ``2n`` reference levels.
    grid : int, optional
        Dense search grid size, default ``max(64 n, 1024)``.

    Returns
    -------
    BestApproxResult
        ``converged`` is false if the spread target was missed within
        ``max_iter`` exchanges; the best-so-far result is returned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    G = grid or max(64 * n, 1024)
    xg = 2 * np.pi * np.arange(G) / G
    fg = np.asarray(f(xg), dtype=float)
    scale = max(1.0, float(np.max(np.abs(fg))))
    ref = np.arange(2 * n) * np.pi / n + np.pi / (4 * n)
    signs = (-1.0) ** np.arange(2 * n)
    best: Optional[BestApproxResult] = None
    h_step = 2 * np.pi / G
    for it in range(1, max_iter + 1):
        A = np.hstack([_basis(ref, n), signs[:, None]])
        sol = np.linalg.lstsq(A, np.asarray(f(ref), dtype=float), rcond=None)[0]
        p = _poly_from(sol[:-1], n)
        eg = fg - p(xg)
        emax = float(np.max(np.abs(eg)))
        if emax <= 1e-13 * scale:
            return BestApproxResult(emax, p, ref, f(ref) - p(ref), it, True)
        idx = _alternating_extrema(xg, eg, 2 * n)
        if idx.size < 2 * n:
            raise ReferenceCollapse(f"only {idx.size} alternating extrema for n = {n}")

        new = _refine(f, p, xg[idx], np.sign(eg[idx]), h_step)
        levels = np.asarray(f(new), dtype=float) - p(new)
        # the true sup norm also sees the refined extrema
        distance = max(emax, float(np.max(np.abs(levels))))
        order = np.argsort(np.mod(new, 2 * np.pi))
        new, levels = np.mod(new, 2 * np.pi)[order], levels[order]
        # levels below the evaluation noise of f cannot be levelled further
        spread = max(0.0, distance - np.min(np.abs(levels)) - 64 * np.finfo(float).eps * scale) / distance
        result = BestApproxResult(distance, p, new, levels, it, bool(spread <= tol))
        if best is None or result.distance < best.distance:
            best = result
        if spread <= tol:
            return result
        ref = new
        signs = np.sign(levels)
    return BestApproxResult(best.distance, best.poly, best.references, best.levels, best.iterations, False)


# ------------------------------------------------------------------ brackets


@dataclass(frozen=True)
class Bracket:
    lower: float
    witness_best: float
    upper: float
    main_term: float
    remainder_scale: float
    C_est: float
    slack: float
    certificate: BestApproxResult = field(repr=False)

    @property
    def ordered(self) -> bool:
        return self.lower <= self.witness_best + 1e-8 and self.witness_best <= self.upper + self.slack

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k != "certificate"}
        d["certificate"] = self.certificate.to_dict()
        return json.dumps(d)


_C_CACHE: dict = {}


def _witness_best(spec: ExtremalSpec, tol: float) -> tuple[BestApproxResult, float]:
    poly, bound = f_star_coefficients(spec)
    return remez_best(poly, spec.n, tol=tol), bound


def calibrate_C(psi, omega, beta: float, pilot: Sequence[int] = PILOT_GRID, tol: float = 1e-9) -> float:
    """``max_n |E_n(f*) - I(n)| / (psi(n) omega(1/n))`` over the pilot grid.

    Cached per ``(psi, omega, beta)`` family.
    """
    from .asymptotics import main_term

    key = (psi.spec or id(psi), omega.spec or id(omega), float(beta), tuple(pilot))
    if key not in _C_CACHE:
        ratios = []
        for n in pilot:
            spec = ExtremalSpec(n, omega, psi, beta)
            res, _ = _witness_best(spec, tol)
            scale = float(psi(float(n))) * float(omega(1.0 / n))
            ratios.append(abs(res.distance - main_term(psi, omega, beta, n)) / scale)
        _C_CACHE[key] = max(ratios)
    return _C_CACHE[key]


def en_bracket(spec: ExtremalSpec, tol: float = 1e-9, pilot: Sequence[int] = PILOT_GRID) -> Bracket:
    """``lower = dvp``, ``witness_best = E_n(f*)`` (Remez), ``upper = I(n) + C_est psi(n) omega(1/n)``.

    ``f*`` is the coefficient-route truncation; ``slack`` is its sup-norm
    truncation bound.
    """
    from .asymptotics import main_term

    n = spec.n
    res, bound = _witness_best(spec, tol)
    lower = dvp_lower_bound(spec) if sin_half_beta(spec.beta) != 0.0 else 0.0
    I = main_term(spec.psi, spec.omega, spec.beta, n)
    scale = float(spec.psi(float(n))) * float(spec.omega(1.0 / n))
    C = calibrate_C(spec.psi, spec.omega, spec.beta, pilot, tol)
    return Bracket(lower, res.distance, I + C * scale, I, scale, C, bound, res)
