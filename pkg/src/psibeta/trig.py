"""Trigonometric polynomials, (psi, beta)-derivatives and kernel convolution.

A function ``f`` with Fourier series ``a0/2 + sum(a_k cos kx + b_k sin kx)``
has (psi, beta)-derivative with k-th harmonic pair rotated by ``beta*pi/2``
and divided by ``psi(k)``.  The inverse operation is convolution with

    Psi_beta(t) = sum_{k >= 1} psi(k) cos(k t + beta pi / 2).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .shapes import DomainError, PsiShape, _doubling_log_integral, cos_half_beta, sin_half_beta

__all__ = [
    "TrigPoly",
    "SampledFunction",
    "KernelSpec",
    "KernelValue",
    "ToleranceUnreachable",
    "AliasingWarning",
    "eval_trig_poly",
    "psi_beta_derivative",
    "psi_beta_antiderivative",
    "kernel_eval",
    "kernel_samples",
    "convolve",
    "uniform_grid",
]

MAX_KERNEL_TERMS = 20_000_000


class ToleranceUnreachable(ArithmeticError):
    """The requested kernel tolerance needs an unaffordable truncation order."""


class AliasingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrigPoly:
    """``a0/2 + sum_{k=1}^N (a[k-1] cos kx + b[k-1] sin kx)``."""

    a0: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        N = max(a.size, b.size)
        a = np.pad(a, (0, N - a.size))
        b = np.pad(b, (0, N - b.size))
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zeros(cls, order: int) -> "TrigPoly":
        return cls(0.0, np.zeros(order), np.zeros(order))

    @property
    def order(self) -> int:
        return int(self.a.size)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.order + 1)

    def __call__(self, x):
        return eval_trig_poly(self, x)

    def truncate(self, order: int) -> "TrigPoly":
        return TrigPoly(self.a0, self.a[:order], self.b[:order])

    def padded(self, order: int) -> "TrigPoly":
        return TrigPoly(self.a0, np.pad(self.a, (0, max(0, order - self.order))), np.pad(self.b, (0, max(0, order - self.order))))

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        N = max(self.order, other.order)
        p, q = self.padded(N), other.padded(N)
        return TrigPoly(p.a0 + q.a0, p.a + q.a, p.b + q.b)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "TrigPoly":
        return TrigPoly(c * self.a0, c * self.a, c * self.b)

    def coef_norm(self) -> float:
        """``|a0|/2 + sum(|a_k| + |b_k|)``, an upper bound for the sup norm."""
        return abs(self.a0) / 2 + float(np.abs(self.a).sum() + np.abs(self.b).sum())

    def to_json(self) -> str:
        return json.dumps({"a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "TrigPoly":
        d = json.loads(text)
        return cls(d["a0"], d["a"], d["b"])


def eval_trig_poly(p: TrigPoly, x):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, p.a0 / 2.0)
    if p.order:
        kx = np.multiply.outer(x, p.k)
        out = out + np.cos(kx) @ p.a + np.sin(kx) @ p.b
    return float(out) if out.ndim == 0 else out


def _rotate(a, b, c, s):
    # coefficient pair of a cos(kx + th) + b sin(kx + th) in the (cos kx, sin kx) basis
    return a * c + b * s, b * c - a * s


def psi_beta_derivative(p: TrigPoly, psi: PsiShape, beta: float) -> TrigPoly:
    k = p.k.astype(float)
    w = 1.0 / np.asarray(psi(k), dtype=float) if p.order else np.zeros(0)
    a, b = _rotate(p.a, p.b, cos_half_beta(beta), sin_half_beta(beta))
    return TrigPoly(0.0, a * w, b * w)


def psi_beta_antiderivative(phi: TrigPoly, psi: PsiShape, beta: float, a0: float = 0.0) -> TrigPoly:
    """Inverse of :func:`psi_beta_derivative`; ``phi`` must have zero mean."""
    if abs(phi.a0) > 1e-14 * max(1.0, phi.coef_norm()):
        raise ValueError("phi must have zero mean")
    k = phi.k.astype(float)
    w = np.asarray(psi(k), dtype=float) if phi.order else np.zeros(0)
    a, b = _rotate(phi.a, phi.b, cos_half_beta(beta), -sin_half_beta(beta))
    return TrigPoly(a0, a * w, b * w)


@dataclass(frozen=True)
class SampledFunction:
    """Samples on a uniform grid of ``[0, 2 pi)``, periodic piecewise-linear in between."""

    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return uniform_grid(self.values.size)

    def __call__(self, x):
        x = np.mod(np.asarray(x, dtype=float), 2 * np.pi)
        xs = np.append(self.x, 2 * np.pi)
        vs = np.append(self.values, self.values[0])
        out = np.interp(x, xs, vs)
        return float(out) if out.ndim == 0 else out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xv, v in zip(self.x, self.values):
                w.writerow([f"{xv:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "SampledFunction":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["value"]) for r in rows]))


def uniform_grid(N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(N) / N


# ------------------------------------------------------------------ kernels


@dataclass(frozen=True)
class KernelSpec:
    """``sum_{k >= n0} psi(k) cos(k t + beta pi/2)`` or, with ``variant='sine'``,
    ``sum_{k >= n0} psi(k) sin(k t)``; ``M`` fixes the truncation order
    (``None`` chooses it from the tolerance)."""

    psi: PsiShape
    beta: float = 0.0
    M: Optional[int] = None
    n0: int = 1
    variant: str = "cos"


@dataclass(frozen=True)
class KernelValue:
    value: float
    bound: float
    M: int


def _partial_sum(psi: PsiShape, n0: int, M: int, t: float, phase: float, sine: bool) -> float:
    total = 0.0
    for lo in range(n0, M + 1, 1_000_000):
        k = np.arange(lo, min(M, lo + 999_999) + 1, dtype=float)
        arg = k * t if sine else k * t + phase
        total += float(np.dot(psi(k), np.sin(arg) if sine else np.cos(arg)))
    return total


def kernel_eval(spec: KernelSpec, t: float, tol: float = 1e-10) -> KernelValue:
    """Truncated kernel value with a rigorous truncation bound.

    Away from ``t = 0 (mod 2 pi)`` the tail after order ``M`` is bounded by
    Abel summation as ``psi(M+1) / |sin(t/2)|``.  At ``t = 0`` the cosine
    variant is a plain series ``cos(beta pi/2) sum psi(k)`` whose tail is
    replaced by the midpoint integral ``int_{M+1/2}^inf psi`` with error at most
    ``|psi'(M)|/12``.
    """
    sine = spec.variant == "sine"
    if spec.variant not in ("cos", "sine"):
        raise ValueError(f"unknown kernel variant {spec.variant!r}")
    phase = math.pi * spec.beta / 2
    half = abs(math.sin(math.remainder(t, 2 * math.pi) / 2))
    psi = spec.psi
    if half < 1e-12:
        if sine:
            return KernelValue(0.0, 0.0, 0)
        c = cos_half_beta(spec.beta)
        if c == 0.0:
            return KernelValue(0.0, 0.0, 0)
        M = spec.M or 10_000
        tail, ok = _doubling_log_integral(lambda x: float(psi(math.exp(x))) * math.exp(x), math.log(M + 0.5), rtol=1e-13)
        if not ok:
            raise ToleranceUnreachable(f"sum psi(k) diverges or converges too slowly for {psi.label}")
        value = c * (_partial_sum(psi, spec.n0, M, 0.0, 0.0, False) + tail)
        return KernelValue(value, abs(c) * abs(float(psi.deriv_plus(float(M)))) / 12.0, M)
    if spec.M is not None:
        M = spec.M
    else:
        target = tol * half
        if target >= float(psi(float(max(spec.n0, 1)))):
            M = spec.n0
        else:
            try:
                M = int(math.ceil(float(psi.inverse(target))))
            except DomainError as exc:
                raise ToleranceUnreachable(str(exc)) from exc
        if M > MAX_KERNEL_TERMS:
            raise ToleranceUnreachable(f"tolerance {tol} at t={t} needs {M} terms for {psi.label}")
    value = _partial_sum(psi, spec.n0, M, t, phase, sine)
    return KernelValue(value, float(psi(float(M + 1))) / half, M)


def kernel_samples(spec: KernelSpec, N: int) -> np.ndarray:
    """Truncated kernel on the uniform N-grid (order ``spec.M`` or ``N//2``)."""
    M = spec.M if spec.M is not None else N // 2
    if M > N // 2:
        warnings.warn(f"kernel order {M} exceeds the grid Nyquist order {N // 2}", AliasingWarning, stacklevel=2)
        t = uniform_grid(N)
        return np.array([_partial_sum(spec.psi, spec.n0, M, tv, math.pi * spec.beta / 2, spec.variant == "sine") for tv in t])
    k = np.arange(spec.n0, M + 1)
    X = np.zeros(N, dtype=complex)
    c = np.asarray(spec.psi(k.astype(float)), dtype=float)
    if spec.variant == "sine":
        X[k] = -1j * c
    else:
        X[k] = c * np.exp(0.5j * math.pi * spec.beta)
    return np.real(N * np.fft.ifft(X))


def convolve(phi, spec: KernelSpec, a0: float = 0.0) -> np.ndarray:
    """``a0/2 + (1/pi) int phi(x + t) Psi_beta(t) dt`` by the trapezoidal rule.

    ``phi`` is a sample array on the uniform grid (length a power of two, at
    least 256) or a :class:`SampledFunction`; the result lives on the same grid.
    The circular sum is evaluated with the FFT.
    """
    values = phi.values if isinstance(phi, SampledFunction) else np.asarray(phi, dtype=float)
    N = values.size
    if N < 256 or N & (N - 1):
        raise ValueError("grid size must be a power of two >= 256")
    if abs(values.mean()) > 1e-10 * max(1.0, np.abs(values).max()):
        raise ValueError("phi must have zero mean")
    K = kernel_samples(spec, N)
    corr = np.real(np.fft.ifft(np.fft.fft(values) * np.conj(np.fft.fft(K))))
    return a0 / 2.0 + 2.0 / N * corr
