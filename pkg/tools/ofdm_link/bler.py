"""
Monte-Carlo block error rate of a PTRS-aided OFDM link under phase noise.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.stats import norm

from ..errors import ConfigurationError, EstimationError, ParameterError
from ..phase_noise import design_pn_filter
from ..phase_noise.synthesis import synthesize_with_filter
from ..signal_core import RngStream, gaussian_array
from .config import ChannelRealization, LinkExperiment
from .modem import QamModem, make_fec
from .pn_matrix import apply_pn_time_domain
from .ptrs import correct_cpe, estimate_cpe, insert_ptrs

# Trials decoded per Viterbi call
DECODE_BATCH = 256


@dataclass(frozen=True)
class BlerPoint:
    snr_db: float
    bler: float
    ci_halfwidth: float
    ci_low: float
    ci_high: float
    trials: int
    block_errors: int
    data_re_count: int
    pilot_overhead: float
    info_bits: int

    @property
    def spectral_efficiency(self) -> float:
        """Information bits per data resource element."""
        return self.info_bits / self.data_re_count


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Raises:
        ParameterError: If trials < 1, errors outside [0, trials] or confidence outside (0, 1)
    """
    if trials < 1 or not 0 <= errors <= trials or not 0 < confidence < 1:
        raise ParameterError(f"Invalid binomial counts {errors}/{trials} at {confidence}")
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z / denom * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return float(max(center - half, 0.0)), float(min(center + half, 1.0))


class _SlotLink:
    """Per-experiment constants shared by every trial."""

    def __init__(self, experiment: LinkExperiment):
        self.experiment = experiment
        ofdm = experiment.ofdm
        if ofdm.n_tx != 1:
            raise ConfigurationError(f"BLER runs support one transmit stream, got n_tx={ofdm.n_tx}",
                                     [("ofdm.n_tx", "must be 1")])
        if experiment.correct_cpe and not experiment.ptrs.enabled:
            raise EstimationError("CPE correction requested without PTRS in the slot")
        self.bins = experiment.allocation.fft_bins(ofdm)
        self.template = insert_ptrs(experiment.allocation, experiment.ptrs)
        self.modem = QamModem(ofdm.modulation)
        self.fec = make_fec(experiment.fec)
        self.capacity = self.template.data_re_count * self.modem.bits_per_symbol
        max_bits = self.fec.info_length(self.capacity)
        self.info_bits = experiment.block_bits if experiment.block_bits is not None else max_bits
        if not 1 <= self.info_bits <= max_bits:
            raise ConfigurationError(
                f"Transport block of {self.info_bits} bits does not fit {self.capacity} coded "
                f"bits ({max_bits} information bits at most)",
                [("block_bits", f"must lie in [1, {max_bits}]")])
        self.coded_bits = self.fec.coded_length(self.info_bits)
        self.pn_filter = None
        if experiment.phase_noise is not None:
            carrier = experiment.carrier_hz or experiment.phase_noise.base_carrier_hz
            self.pn_filter = design_pn_filter(experiment.phase_noise, carrier, ofdm.sample_rate_hz)

    def _phase(self, side: str, stream: RngStream) -> np.ndarray:
        ofdm = self.experiment.ofdm
        shape = (self.template.n_symbols, ofdm.n_subcarriers)
        if self.pn_filter is None or self.experiment.pn_sides not in (side, "both"):
            return np.zeros(shape)
        n = self.template.n_symbols * ofdm.symbol_samples
        trajectory = synthesize_with_filter(self.pn_filter, n, stream)
        # cyclic-prefix samples consume phase noise but are discarded
        return trajectory.phase_rad.reshape(self.template.n_symbols, -1)[:, ofdm.cp_len:]

    def received_bits(self, snr_db: float, stream: RngStream) -> Tuple[np.ndarray, np.ndarray]:
        """One slot through the link: (information bits, hard-decided coded bits)."""
        ex = self.experiment
        ofdm = ex.ofdm
        gen = stream.generator
        info = gen.integers(0, 2, self.info_bits, dtype=np.uint8)
        padding = gen.integers(0, 2, self.capacity - self.coded_bits, dtype=np.uint8)
        symbols = self.modem.modulate(np.concatenate([self.fec.encode(info), padding]))
        grid = insert_ptrs(ex.allocation, ex.ptrs, symbols)

        x = np.zeros((grid.n_symbols, ofdm.n_subcarriers), dtype=np.complex128)
        x[:, self.bins] = grid.values
        if ex.channel == "rayleigh":
            channel = ChannelRealization.rayleigh(ofdm.n_subcarriers, ofdm.n_rx, 1, stream)
        else:
            channel = ChannelRealization.flat(ofdm.n_subcarriers, ofdm.n_rx, 1)
        theta_tx = self._phase("tx", stream)
        theta_rx = self._phase("rx", stream)
        y = apply_pn_time_domain(channel, theta_tx, theta_rx, x)
        y = y.reshape(grid.n_symbols, ofdm.n_subcarriers, ofdm.n_rx)
        y = y + gaussian_array(stream, y.shape, 10.0 ** (-snr_db / 10.0))

        rx = np.transpose(y[:, self.bins, :], (2, 0, 1))
        h_known = channel.blocks[self.bins, :, 0].T
        if ex.correct_cpe:
            rx = correct_cpe(rx, estimate_cpe(rx, grid, h_known))
        combined = (np.sum(np.conj(h_known)[:, None, :] * rx, axis=0)
                    / np.sum(np.abs(h_known) ** 2, axis=0)[None, :])
        hard = self.modem.demodulate(grid.data_values(combined))[:self.coded_bits]
        return info, hard

    def block_errors(self, snr_db: float, streams: List[RngStream]) -> int:
        """Block errors over one batch of trials, decoded together."""
        slots = [self.received_bits(snr_db, stream) for stream in streams]
        info = np.stack([bits for bits, _ in slots])
        hard = np.stack([coded for _, coded in slots])
        decoded = self.fec.decode(hard, self.info_bits)
        return int(np.count_nonzero(np.any(decoded != info, axis=-1)))


def _batches(streams: List[RngStream], threads: int) -> List[List[RngStream]]:
    size = max(1, min(DECODE_BATCH, -(-len(streams) // threads)))
    return [streams[j:j + size] for j in range(0, len(streams), size)]


def run_bler(experiment: LinkExperiment, rng: RngStream) -> List[BlerPoint]:
    """
    BLER versus SNR, one transport block per 7-symbol slot.

    Trial t at SNR index i draws everything from stream i * trials + t of
    the seed, so results do not depend on the thread count or on how trials
    are batched for decoding.

    Raises:
        ConfigurationError: If the block does not fit the allocation or the
            antenna setup is unsupported
        EstimationError: If CPE correction is requested without PTRS
    """
    link = _SlotLink(experiment)
    trials = experiment.trials
    points = []
    for i, snr_db in enumerate(experiment.snr_db):
        streams = [rng.spawn(i * trials + t) for t in range(trials)]
        batches = _batches(streams, experiment.threads)
        if experiment.threads > 1:
            with ThreadPoolExecutor(max_workers=experiment.threads) as pool:
                outcomes = list(pool.map(lambda b: link.block_errors(snr_db, b), batches))
        else:
            outcomes = [link.block_errors(snr_db, b) for b in batches]
        errors = int(sum(outcomes))
        low, high = wilson_interval(errors, trials)
        point = BlerPoint(
            snr_db=snr_db,
            bler=errors / trials,
            ci_halfwidth=(high - low) / 2.0,
            ci_low=low,
            ci_high=high,
            trials=trials,
            block_errors=errors,
            data_re_count=link.template.data_re_count,
            pilot_overhead=link.template.pilot_overhead,
            info_bits=link.info_bits,
        )
        logging.info(f"SNR {snr_db:.2f} dB: {errors}/{trials} block errors")
        points.append(point)
    return points
