"""
Welch spectral estimation for complex baseband signals.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import signal as sps

from ..errors import ParameterError, raise_if_violations
from .sequences import ComplexSequence, power_db_floor

MIN_SEGMENT_LEN = 8


@dataclass(frozen=True)
class SpectrumEstimate:
    """
    Two-sided power spectral density estimate.

    Attributes:
        freqs_hz: Strictly increasing frequency axis (Hz)
        psd_db: Density in dB per Hz (-inf where the power is exactly zero)
        resolution_hz: Bin spacing
    """
    freqs_hz: np.ndarray
    psd_db: np.ndarray
    resolution_hz: float

    def __post_init__(self) -> None:
        freqs = np.asarray(self.freqs_hz, dtype=float)
        psd = np.asarray(self.psd_db, dtype=float)
        violations = []
        if freqs.shape != psd.shape:
            violations.append(("psd_db", f"length {psd.size} differs from freqs_hz {freqs.size}"))
        if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
            violations.append(("freqs_hz", "must be strictly increasing"))
        if not self.resolution_hz > 0:
            violations.append(("resolution_hz", "must be positive"))
        raise_if_violations("SpectrumEstimate", violations)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "psd_db", psd)

    @property
    def psd_linear(self) -> np.ndarray:
        return np.power(10.0, self.psd_db / 10.0)

    def total_power(self) -> float:
        """Integrated linear PSD, comparable to the time-domain mean square."""
        return float(np.sum(self.psd_linear) * self.resolution_hz)

    def band_average_db(self, f_lo: float, f_hi: float) -> float:
        """Mean linear density over |f| in [f_lo, f_hi], in dB."""
        mask = (np.abs(self.freqs_hz) >= f_lo) & (np.abs(self.freqs_hz) <= f_hi)
        if not np.any(mask):
            raise ParameterError(f"No bins between {f_lo} Hz and {f_hi} Hz")
        return float(10.0 * np.log10(np.mean(self.psd_linear[mask])))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"freq_hz": self.freqs_hz, "psd_db": self.psd_db})


def welch_psd(x: ComplexSequence, segment_len: int = 1024, overlap_fraction: float = 0.5,
              window: str = "hann") -> SpectrumEstimate:
    """
    Averaged modified-periodogram PSD of a complex sequence.

    The window power is normalized so white noise of variance s2 yields a
    flat two-sided level of s2 / sample_rate.

    Args:
        x: Input sequence
        segment_len: Samples per segment (8 <= segment_len <= len(x))
        overlap_fraction: Fractional overlap in [0, 1)
        window: Any window name accepted by scipy.signal.get_window

    Returns:
        SpectrumEstimate on an fftshifted axis from -fs/2 to fs/2

    Raises:
        ParameterError: If the segment, overlap or window settings are invalid
    """
    violations = []
    if segment_len < MIN_SEGMENT_LEN:
        violations.append(("segment_len", f"must be at least {MIN_SEGMENT_LEN}"))
    if segment_len > len(x):
        violations.append(("segment_len", f"{segment_len} exceeds signal length {len(x)}"))
    if not 0.0 <= overlap_fraction < 1.0:
        violations.append(("overlap_fraction", "must lie in [0, 1)"))
    taper = None
    try:
        taper = sps.get_window(window, max(int(segment_len), MIN_SEGMENT_LEN))
    except (ValueError, TypeError) as error:
        violations.append(("window", f"unknown window {window!r}: {error}"))
    raise_if_violations("welch_psd arguments", violations)

    noverlap = int(overlap_fraction * segment_len)
    fs = x.sample_rate_hz
    logging.debug(f"Welch PSD: {len(x)} samples, segment {segment_len}, overlap {noverlap}")
    freqs, pxx = sps.welch(
        x.samples,
        fs=fs,
        window=taper,
        nperseg=segment_len,
        noverlap=noverlap,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    pxx = np.fft.fftshift(pxx)
    return SpectrumEstimate(freqs, power_db_floor(pxx), fs / segment_len)
