"""
mmWave transceiver impairment toolkit.
Provides phase-noise, power-amplifier, antenna-array and OFDM link models
behind a reproducible experiment runner.
"""

__version__ = '0.1.0'

from . import signal_core, phase_noise, pa_models, antenna_array, ofdm_link, experiment

__all__ = ['signal_core', 'phase_noise', 'pa_models', 'antenna_array', 'ofdm_link',
           'experiment', '__version__']
