"""
OFDM link tool: phase-noise impairments on a MIMO-OFDM link.

This package provides functionality to:
- Build the circulant phase-noise operators from oscillator trajectories
- Apply phase noise in matrix and time-domain form and split CPE from ICI
- Insert PTRS, estimate and correct the common phase error
- Run Monte-Carlo BLER curves with QAM and a convolutional code
"""

from .bler import BlerPoint, run_bler, wilson_interval
from .config import (
    ChannelRealization,
    LinkExperiment,
    OfdmConfig,
    PrbAllocation,
    PtrsConfig,
)
from .modem import ConvolutionalCode, QamModem, UncodedFec
from .output_handler import bler_frame, save_bler_curve
from .pn_matrix import (
    PnMatrices,
    apply_pn_matrix_model,
    apply_pn_time_domain,
    build_pn_matrix,
    decompose_cpe_ici,
    pn_dft_coeffs,
    pn_impairment_powers,
)
from .ptrs import ResourceGrid, correct_cpe, estimate_cpe, insert_ptrs

__all__ = [
    'OfdmConfig', 'PrbAllocation', 'PtrsConfig', 'ChannelRealization', 'LinkExperiment',
    'PnMatrices', 'pn_dft_coeffs', 'build_pn_matrix', 'apply_pn_matrix_model',
    'apply_pn_time_domain', 'decompose_cpe_ici', 'pn_impairment_powers',
    'ResourceGrid', 'insert_ptrs', 'estimate_cpe', 'correct_cpe',
    'QamModem', 'ConvolutionalCode', 'UncodedFec',
    'BlerPoint', 'run_bler', 'wilson_interval', 'bler_frame', 'save_bler_curve',
]
