"""Approximation of periodic (psi, beta)-differentiable classes by trigonometric polynomials."""

from .asymptotics import ApproxReport, approx_report, example1_asymptote, main_term
from .best_approx import en_bracket, remez_best
from .extremal import ExtremalSpec, dvp_lower_bound, f_star
from .linear_method import TauKernel, apply_U_psi, remainder_via_representation
from .shapes import Modulus, PsiShape, parse_omega, parse_psi
from .trig import TrigPoly

__version__ = "0.1.0"

__all__ = [
    "ApproxReport",
    "ExtremalSpec",
    "Modulus",
    "PsiShape",
    "TauKernel",
    "TrigPoly",
    "apply_U_psi",
    "approx_report",
    "dvp_lower_bound",
    "en_bracket",
    "example1_asymptote",
    "f_star",
    "main_term",
    "parse_omega",
    "parse_psi",
    "remainder_via_representation",
    "remez_best",
]
