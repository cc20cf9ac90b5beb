"""Numerical laboratory for the Hardy-Sobolev inequality and its stability."""

__version__ = "0.1.0"

from .errors import AccuracyError, DomainError, ExtrapolationError, FitError, ResolutionError
from .params import ProblemParams, best_constant, el_normalization_constant, gamma_fn
from .radial import MultiSector, QuadratureSpec, RadialFunction, integrate_radial, resample
from .bubble import Bubble, ManifoldPoint, apply_T, tangent_generator
from .functionals import (
    DeficitReport,
    deficit,
    dual_norm,
    el_residual,
    energy,
    gamma_norm_sq,
    hs_norm,
    inner_gamma,
)
from .spectral import SectorEigenproblem, SpectrumReport, apply_linearized, solve_sector, spectrum_report
from .manifold import ProjectionResult, delta_interaction, greedy_multibubble_fit, project
from .interaction import InteractionScan, interaction_integral, scan_and_fit
from .experiments import StabilityScan, alpha_table, bianchi_egnell_scan, cfm_scan

__all__ = [
    "AccuracyError", "DomainError", "ExtrapolationError", "FitError", "ResolutionError",
    "ProblemParams", "best_constant", "el_normalization_constant", "gamma_fn",
    "MultiSector", "QuadratureSpec", "RadialFunction", "integrate_radial", "resample",
    "Bubble", "ManifoldPoint", "apply_T", "tangent_generator",
    "DeficitReport", "deficit", "dual_norm", "el_residual", "energy", "gamma_norm_sq",
    "hs_norm", "inner_gamma",
    "SectorEigenproblem", "SpectrumReport", "apply_linearized", "solve_sector",
    "spectrum_report",
    "ProjectionResult", "delta_interaction", "greedy_multibubble_fit", "project",
    "InteractionScan", "interaction_integral", "scan_and_fit",
    "StabilityScan", "alpha_table", "bianchi_egnell_scan", "cfm_scan",
]
