"""
Frequency-domain phase-noise model of a MIMO-OFDM symbol.

Stacked vectors order subcarriers first and antennas second: entry
k*n_ant + a belongs to subcarrier k and antenna a, so the per-antenna
phase-noise operator is G kron I.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.linalg import circulant

from ..errors import ParameterError
from ..phase_noise import PhaseTrajectory
from ..signal_core import RngStream, gaussian_array
from .config import ChannelRealization

PhaseLike = Union[PhaseTrajectory, np.ndarray]


def _phase_array(theta: PhaseLike) -> np.ndarray:
    if isinstance(theta, PhaseTrajectory):
        return theta.phase_rad
    return np.asarray(theta, dtype=float)


def pn_dft_coeffs(theta: PhaseLike, n_fft: int = None) -> np.ndarray:
    """
    g_k = (1/N) sum_n exp(j theta_n) exp(-j 2 pi n k / N).

    Zero phase gives g = (1, 0, ..., 0) and sum |g_k|^2 = 1 for any theta.

    Raises:
        ParameterError: If the segment length differs from n_fft
    """
    phase = _phase_array(theta)
    n = phase.shape[-1] if n_fft is None else int(n_fft)
    if phase.shape[-1] != n:
        raise ParameterError(f"Phase segment has {phase.shape[-1]} samples, expected {n}",
                             [("theta", "length must equal the FFT size")])
    return np.fft.fft(np.exp(1j * phase), axis=-1) / n


def build_pn_matrix(g: np.ndarray) -> np.ndarray:
    """Circulant matrix with entry (k, l) = g[(k - l) mod N]."""
    return circulant(np.asarray(g, dtype=np.complex128))


@dataclass(frozen=True)
class PnMatrices:
    """DFT coefficients of the transmit and receive oscillators."""
    g_tx: np.ndarray
    g_rx: np.ndarray

    def __post_init__(self) -> None:
        g_tx = np.asarray(self.g_tx, dtype=np.complex128)
        g_rx = np.asarray(self.g_rx, dtype=np.complex128)
        if g_tx.shape != g_rx.shape or g_tx.ndim != 1:
            raise ParameterError("g_tx and g_rx must be vectors of equal length",
                                 [("g_rx", f"shape {g_rx.shape} vs g_tx {g_tx.shape}")])
        object.__setattr__(self, "g_tx", g_tx)
        object.__setattr__(self, "g_rx", g_rx)

    @classmethod
    def from_trajectories(cls, theta_tx: PhaseLike, theta_rx: PhaseLike) -> "PnMatrices":
        return cls(pn_dft_coeffs(theta_tx), pn_dft_coeffs(theta_rx))

    @classmethod
    def ideal(cls, n_fft: int) -> "PnMatrices":
        g = np.zeros(n_fft, dtype=np.complex128)
        g[0] = 1.0
        return cls(g, g.copy())

    @property
    def g_t(self) -> np.ndarray:
        return build_pn_matrix(self.g_tx)

    @property
    def g_r(self) -> np.ndarray:
        return build_pn_matrix(self.g_rx)


def _split(h: ChannelRealization, x: np.ndarray, n_ant: int) -> np.ndarray:
    n = h.n_subcarriers
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != n * n_ant:
        raise ParameterError(f"Stacked vector has {x.shape[-1]} entries, expected {n}*{n_ant}",
                             [("x", "length must be N * antennas")])
    return x.reshape(x.shape[:-1] + (n, n_ant))


def _check_g(h: ChannelRealization, *gs: np.ndarray) -> None:
    for g in gs:
        if np.asarray(g).shape[-1] != h.n_subcarriers:
            raise ParameterError(f"PN coefficient vector of length {np.asarray(g).shape[-1]} "
                                 f"for {h.n_subcarriers} subcarriers",
                                 [("g", "length must equal the channel's subcarrier count")])


def _channel(h: ChannelRealization, z: np.ndarray) -> np.ndarray:
    return np.einsum("krt,...kt->...kr", h.blocks, z)


def apply_pn_matrix_model(h: ChannelRealization, g_tx: np.ndarray, g_rx: np.ndarray,
                          x: np.ndarray, noise_variance: float = 0.0,
                          rng: RngStream = None) -> np.ndarray:
    """
    y = (G_R kron I) H (G_T kron I) x + w on stacked vectors.

    The Kronecker products are applied as one circulant product per antenna
    column.

    Raises:
        ParameterError: On dimension mismatch or a noisy call without rng
    """
    n_rx, n_tx = h.shape
    _check_g(h, g_tx, g_rx)
    xs = _split(h, x, n_tx)
    z = build_pn_matrix(g_tx) @ xs
    y = build_pn_matrix(g_rx) @ _channel(h, z)
    if noise_variance > 0:
        if rng is None:
            raise ParameterError("A random stream is required when noise_variance > 0")
        y = y + gaussian_array(rng, y.shape, noise_variance)
    return y.reshape(y.shape[:-2] + (-1,))


def apply_pn_time_domain(h: ChannelRealization, theta_tx: PhaseLike, theta_rx: PhaseLike,
                         x_freq: np.ndarray) -> np.ndarray:
    """
    Time-domain realization of the same model.

    Per transmit antenna the symbol is taken to time, multiplied by the
    transmit phasor, circularly convolved with the channel taps, multiplied
    by the receive phasor and taken back to frequency. Leading axes of
    x_freq and the phase arrays are batch axes.
    """
    n_rx, n_tx = h.shape
    n = h.n_subcarriers
    xs = _split(h, x_freq, n_tx)
    phase_tx = _phase_array(theta_tx)
    phase_rx = _phase_array(theta_rx)
    if phase_tx.shape[-1] != n or phase_rx.shape[-1] != n:
        raise ParameterError(f"Phase segments must have {n} samples",
                             [("theta", "length must equal the FFT size")])
    s = np.fft.ifft(xs, axis=-2) * np.exp(1j * phase_tx)[..., :, None]
    # circular convolution with the taps ifft(H_k), done as a DFT-domain product
    r = np.fft.ifft(_channel(h, np.fft.fft(s, axis=-2)), axis=-2)
    y = np.fft.fft(r * np.exp(1j * phase_rx)[..., :, None], axis=-2)
    return y.reshape(y.shape[:-2] + (-1,))


def decompose_cpe_ici(h: ChannelRealization, g_tx: np.ndarray, g_rx: np.ndarray,
                      x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the noiseless output into common phase error and inter-carrier
    interference terms.

    With P = G - g_0 I on each side,
    e = g0_rx H (P_T x) + g0_tx P_R H x + P_R H P_T x.

    Returns:
        (cpe_term, ici_term), both stacked like the output
    """
    n_rx, n_tx = h.shape
    _check_g(h, g_tx, g_rx)
    g_tx = np.asarray(g_tx, dtype=np.complex128)
    g_rx = np.asarray(g_rx, dtype=np.complex128)
    xs = _split(h, x, n_tx)
    eye = np.eye(h.n_subcarriers)
    p_t = build_pn_matrix(g_tx) - g_tx[0] * eye
    p_r = build_pn_matrix(g_rx) - g_rx[0] * eye
    hx = _channel(h, xs)
    cpe = g_rx[0] * g_tx[0] * hx
    h_pt_x = _channel(h, p_t @ xs)
    ici = g_rx[0] * h_pt_x + g_tx[0] * (p_r @ hx) + p_r @ h_pt_x
    return cpe.reshape(cpe.shape[:-2] + (-1,)), ici.reshape(ici.shape[:-2] + (-1,))


@dataclass(frozen=True)
class PnImpairmentPowers:
    cpe_power: float
    ici_power: float
    n_symbols: int

    @property
    def cpe_to_ici_db(self) -> float:
        return float(10.0 * np.log10(self.cpe_power / self.ici_power))


def pn_impairment_powers(theta: PhaseLike, n_fft: int, cp_len: int = 0) -> PnImpairmentPowers:
    """
    Average CPE power |g_0|^2 and ICI power 1 - |g_0|^2 over the whole OFDM
    symbols contained in a trajectory (cyclic prefixes skipped).

    Raises:
        ParameterError: If the trajectory is shorter than one symbol
    """
    phase = _phase_array(theta)
    step = n_fft + cp_len
    n_symbols = phase.size // step
    if n_symbols < 1:
        raise ParameterError(f"Trajectory of {phase.size} samples holds no {step}-sample symbol")
    body = phase[:n_symbols * step].reshape(n_symbols, step)[:, cp_len:]
    g0 = pn_dft_coeffs(body, n_fft)[:, 0]
    cpe = float(np.mean(np.abs(g0) ** 2))
    logging.debug(f"PN impairment over {n_symbols} symbols: CPE {cpe:.6f}, ICI {1.0 - cpe:.3e}")
    return PnImpairmentPowers(cpe_power=cpe, ici_power=float(1.0 - cpe), n_symbols=n_symbols)
