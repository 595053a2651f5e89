"""
Antenna array tool: idealized array and transmitarray computations.

This package provides functionality to:
- Describe periodic and aperiodic layouts, element patterns and beam weights
- Steer beams and quantize phase shifters to 2^bits states
- Evaluate array factors, total gain patterns and directivity
- Analyse grating lobes and peak sidelobe levels
- Budget transmitarray gain and check patterns against radiation masks
"""

from .geometry import (
    HANDSET_ELEMENT,
    AngularGrid,
    ArrayGeometry,
    BeamWeights,
    ElementPattern,
    grating_lobe_limit,
    quantize_phase,
    steering_weights,
)
from .output_handler import load_mask, mask_from_dict, pattern_frame, save_pattern
from .pattern import (
    DirectivityReport,
    FarFieldPattern,
    MaskComplianceReport,
    RadiationMask,
    array_factor,
    directivity,
    directivity_report,
    integrate_intensity,
    mask_compliance,
    peak_sidelobe_level,
    total_pattern,
)
from .transmitarray import (
    TransmitarrayBudget,
    TransmitarrayConfig,
    quantization_loss_db,
    transmitarray_budget,
    transmitarray_pattern,
)

__all__ = [
    'ArrayGeometry', 'AngularGrid', 'BeamWeights', 'ElementPattern', 'HANDSET_ELEMENT',
    'steering_weights', 'quantize_phase', 'grating_lobe_limit',
    'FarFieldPattern', 'DirectivityReport', 'array_factor', 'total_pattern', 'directivity',
    'directivity_report', 'integrate_intensity', 'peak_sidelobe_level',
    'RadiationMask', 'MaskComplianceReport', 'mask_compliance',
    'TransmitarrayConfig', 'TransmitarrayBudget', 'transmitarray_budget',
    'transmitarray_pattern', 'quantization_loss_db',
    'pattern_frame', 'save_pattern', 'load_mask', 'mask_from_dict',
]
