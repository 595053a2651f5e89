"""
PA models tool: behavioural and statistical power-amplifier models.

This package provides functionality to:
- Apply a static third-order polynomial and its Bussgang decomposition
- Evaluate and fit generalized memory polynomials (GMP)
- Build and sample the multi-antenna statistical model Y = Lambda X + W
- Read and write GMP coefficient files and fit reports
"""

from .array_stat import ArrayStatModel, apply_array_stat, build_array_stat_model
from .gmp import GmpFitReport, GmpModel, GmpStructure, apply_gmp, fit_gmp, gmp_basis
from .output_handler import (
    bussgang_sweep_frame,
    format_fit_report,
    load_gmp_coefficients,
    parse_gmp_coefficients,
    save_gmp_coefficients,
)
from .polynomial import (
    DISTORTION_FORMULAS,
    BussgangParams,
    DistortionPowerResult,
    Poly3Params,
    apply_poly3,
    bussgang_alpha,
    bussgang_decompose,
    bussgang_distortion_power,
)

__all__ = [
    'Poly3Params', 'BussgangParams', 'DistortionPowerResult', 'DISTORTION_FORMULAS',
    'apply_poly3', 'bussgang_alpha', 'bussgang_distortion_power', 'bussgang_decompose',
    'GmpStructure', 'GmpModel', 'GmpFitReport', 'gmp_basis', 'apply_gmp', 'fit_gmp',
    'ArrayStatModel', 'build_array_stat_model', 'apply_array_stat',
    'save_gmp_coefficients', 'load_gmp_coefficients', 'parse_gmp_coefficients',
    'format_fit_report', 'bussgang_sweep_frame',
]
