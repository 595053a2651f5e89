"""
Phase noise tool for mmWave oscillators.

This package provides functionality to:
- Evaluate the multi pole/zero phase-noise PSD and its carrier scaling
- Design bilinear-transform shaping filters and synthesize trajectories
- Combine reference, loop-filter and VCO noise through a PLL transfer model
"""

from .models import (
    PRESETS,
    SET_A,
    SET_B,
    PoleZeroPnParams,
    PowerLawPsd,
    carrier_scale_db,
    eval_pole_zero_psd,
    integrated_phase_variance,
    scaled_to,
)
from .output_handler import pll_psd_frame, pn_multi_carrier_frame, pn_psd_frame, save_psd_curve
from .pll import PllPnParams, eval_pll_psd, loop_bandwidth_hz, pll_transfer
from .synthesis import PhaseTrajectory, PnFilter, design_pn_filter, synthesize_phase

__all__ = [
    'PoleZeroPnParams', 'PowerLawPsd', 'SET_A', 'SET_B', 'PRESETS',
    'eval_pole_zero_psd', 'carrier_scale_db', 'scaled_to', 'integrated_phase_variance',
    'PnFilter', 'PhaseTrajectory', 'design_pn_filter', 'synthesize_phase',
    'PllPnParams', 'eval_pll_psd', 'pll_transfer', 'loop_bandwidth_hz',
    'pn_psd_frame', 'pn_multi_carrier_frame', 'pll_psd_frame', 'save_psd_curve',
]
