"""
Signal core: numeric services shared by every impairment model.

This package provides:
- Immutable complex sample buffers
- Reproducible (seed, stream_id) random streams
- Welch spectral estimation
- dB / linear conversions
"""

from .sequences import (
    ComplexSequence,
    RngStream,
    db_lin_convert,
    from_db,
    gaussian_array,
    gaussian_complex,
    power_db_floor,
    to_db,
)
from .spectrum import SpectrumEstimate, welch_psd

__all__ = [
    'ComplexSequence', 'RngStream', 'gaussian_complex', 'gaussian_array',
    'SpectrumEstimate', 'welch_psd', 'db_lin_convert', 'to_db', 'from_db', 'power_db_floor',
]
