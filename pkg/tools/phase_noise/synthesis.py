"""
Discrete-time phase-noise synthesis.

Each analog section (1 + s/wz)/(1 + s/wp) is mapped through the bilinear
transform with its corners prewarped, so every digital corner lands on
its analog frequency. The cascade has unit DC gain; a scalar gain sets
the plateau level.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import bilinear_zpk, sosfilt, sosfreqz, zpk2sos

from ..errors import ParameterError, raise_if_violations
from ..signal_core import RngStream
from .models import PoleZeroPnParams, carrier_scale_db, corner_frequencies_hz

SIDEBANDS = ("ssb", "dsb")


@dataclass(frozen=True)
class PhaseTrajectory:
    """Phase samples in radians."""
    phase_rad: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        phase = np.array(self.phase_rad, dtype=float).reshape(-1)
        violations = []
        if phase.size < 1:
            violations.append(("phase_rad", "at least one sample is required"))
        if not np.all(np.isfinite(phase)):
            violations.append(("phase_rad", "all samples must be finite"))
        if not self.sample_rate_hz > 0:
            violations.append(("sample_rate_hz", "must be positive"))
        raise_if_violations("PhaseTrajectory", violations)
        phase.flags.writeable = False
        object.__setattr__(self, "phase_rad", phase)

    def __len__(self) -> int:
        return self.phase_rad.size

    def phasor(self) -> np.ndarray:
        """exp(j*theta) for multiplying onto a baseband signal."""
        return np.exp(1j * self.phase_rad)


@dataclass(frozen=True)
class PnFilter:
    """
    Realized phase-noise shaping filter.

    Attributes:
        sos: Second-order-section cascade with unit DC gain
        gain: Scalar gain applied to unit-variance white noise
        sample_rate_hz: Design sample rate
        warmup_samples: Default transient discard length
    """
    sos: np.ndarray
    gain: float
    sample_rate_hz: float
    warmup_samples: int

    def response(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Complex response including the scalar gain."""
        f = np.abs(np.atleast_1d(np.asarray(freqs_hz, dtype=float)))
        _, h = sosfreqz(self.sos, worN=f, fs=self.sample_rate_hz)
        return self.gain * h

    def psd(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Two-sided output PSD (linear, rad^2/Hz) for unit white input."""
        return np.abs(self.response(freqs_hz)) ** 2 / self.sample_rate_hz

    def psd_db(self, freqs_hz: np.ndarray) -> np.ndarray:
        return 10.0 * np.log10(self.psd(freqs_hz))


def prewarp_hz(freq_hz: np.ndarray, sample_rate_hz: float) -> np.ndarray:
    """Analog angular frequency that the bilinear map sends to freq_hz."""
    return 2.0 * sample_rate_hz * np.tan(np.pi * np.asarray(freq_hz) / sample_rate_hz)


def design_pn_filter(params: PoleZeroPnParams, carrier_hz: float, sample_rate_hz: float,
                     sideband: str = "ssb") -> PnFilter:
    """
    Design the discrete filter whose output PSD follows the pole/zero model.

    Args:
        params: Pole/zero model
        carrier_hz: Carrier frequency (Hz), shifts the plateau
        sample_rate_hz: Sample rate (Hz); every corner must lie below Nyquist
        sideband: 'ssb' when the model level is L(f), 'dsb' when it is the
            single-sided phase PSD (halved before use)

    Returns:
        PnFilter with unit-DC-gain sections and the plateau gain

    Raises:
        ParameterError: If a corner is at or above Nyquist, or the sideband is unknown
    """
    violations = []
    if not sample_rate_hz > 0:
        violations.append(("sample_rate_hz", "must be positive"))
    if sideband not in SIDEBANDS:
        violations.append(("sideband", f"must be one of {SIDEBANDS}, got {sideband!r}"))
    raise_if_violations("phase-noise filter design", violations)

    nyquist = sample_rate_hz / 2.0
    for name, freq in corner_frequencies_hz(params):
        if freq >= nyquist:
            violations.append((name, f"corner {freq:.6g} Hz is not below Nyquist {nyquist:.6g} Hz"))
    raise_if_violations("phase-noise filter design", violations)

    zeros = -prewarp_hz(params.zeros_hz, sample_rate_hz)
    poles = -prewarp_hz(params.poles_hz, sample_rate_hz)
    # unit DC gain for each (1 + s/wz)/(1 + s/wp)
    k_analog = float(np.prod(poles / zeros))
    z, p, k = bilinear_zpk(zeros, poles, k_analog, fs=sample_rate_hz)
    sos = zpk2sos(z, p, k)

    s0_db = params.psd0_dbc_hz + carrier_scale_db(carrier_hz, params.base_carrier_hz)
    s0_lin = 10.0 ** (s0_db / 10.0)
    if sideband == "dsb":
        s0_lin /= 2.0
    gain = float(np.sqrt(s0_lin * sample_rate_hz))

    slowest = float(np.min(params.poles_hz))
    warmup = int(np.ceil(4.0 * sample_rate_hz / (2.0 * np.pi * slowest)))
    logging.debug(f"PN filter: {sos.shape[0]} sections, gain {gain:.4e}, warm-up {warmup}")
    return PnFilter(sos=sos, gain=gain, sample_rate_hz=float(sample_rate_hz),
                    warmup_samples=warmup)


def synthesize_phase(params: PoleZeroPnParams, carrier_hz: float, sample_rate_hz: float,
                     n: int, rng: RngStream, sideband: str = "ssb",
                     warmup_samples: int = None) -> PhaseTrajectory:
    """
    Generate a stationary Gaussian phase-noise trajectory.

    A warm-up prefix (default four times the slowest pole time constant) is
    filtered and discarded.

    Args:
        params: Pole/zero model
        carrier_hz: Carrier frequency (Hz)
        sample_rate_hz: Sample rate (Hz)
        n: Number of output samples (>= 1)
        rng: Random stream driving the white noise
        sideband: Level convention, see design_pn_filter
        warmup_samples: Override for the discarded prefix length

    Raises:
        ParameterError: If n < 1 or the filter cannot be designed
    """
    if n < 1:
        raise ParameterError(f"Trajectory length must be at least 1, got {n}")
    pn_filter = design_pn_filter(params, carrier_hz, sample_rate_hz, sideband)
    return synthesize_with_filter(pn_filter, n, rng, warmup_samples)


def synthesize_with_filter(pn_filter: PnFilter, n: int, rng: RngStream,
                           warmup_samples: int = None) -> PhaseTrajectory:
    warmup = pn_filter.warmup_samples if warmup_samples is None else int(warmup_samples)
    if warmup < 0:
        raise ParameterError(f"Warm-up length must be non-negative, got {warmup}")
    white = rng.generator.standard_normal(n + warmup)
    shaped = pn_filter.gain * sosfilt(pn_filter.sos, white)
    return PhaseTrajectory(shaped[warmup:], pn_filter.sample_rate_hz)
