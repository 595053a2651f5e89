"""
Link configuration records: numerology, PRB allocation, PTRS layout and
per-subcarrier MIMO channels.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ParameterError, raise_if_violations
from ..signal_core import RngStream, gaussian_array

MODULATION_BITS = {"QPSK": 2, "16QAM": 4, "64QAM": 6}
SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_SLOT = 7
FREQ_DENSITIES = (1, 2, 4, 8, 16)
TIME_DENSITIES = (1, 2, 4)
CHANNEL_KINDS = ("flat-awgn", "rayleigh", "user")


@dataclass(frozen=True)
class OfdmConfig:
    """
    OFDM numerology and antenna counts.

    Attributes:
        n_subcarriers: FFT size N, a power of two >= 8
        cp_len: Cyclic prefix length in samples, < N
        subcarrier_spacing_hz: Subcarrier spacing
        n_tx, n_rx: Transmit and receive antenna counts
        modulation: 'QPSK', '16QAM' or '64QAM'
    """
    n_subcarriers: int
    cp_len: int
    subcarrier_spacing_hz: float
    n_tx: int = 1
    n_rx: int = 1
    modulation: str = "64QAM"

    def __post_init__(self) -> None:
        n = self.n_subcarriers
        violations = []
        if int(n) != n or n < 8 or (int(n) & (int(n) - 1)) != 0:
            violations.append(("n_subcarriers", f"must be a power of two >= 8, got {n}"))
        if not 0 <= self.cp_len < n:
            violations.append(("cp_len", f"must lie in [0, {n}), got {self.cp_len}"))
        if not self.subcarrier_spacing_hz > 0:
            violations.append(("subcarrier_spacing_hz", "must be positive"))
        for name in ("n_tx", "n_rx"):
            if getattr(self, name) < 1:
                violations.append((name, "must be at least 1"))
        if self.modulation not in MODULATION_BITS:
            violations.append(("modulation", f"must be one of {sorted(MODULATION_BITS)}"))
        raise_if_violations("OfdmConfig", violations)

    @property
    def sample_rate_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def symbol_samples(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def bits_per_symbol(self) -> int:
        return MODULATION_BITS[self.modulation]


@dataclass(frozen=True)
class PrbAllocation:
    """n_prbs resource blocks of 12 subcarriers by 7 symbols."""
    n_prbs: int

    def __post_init__(self) -> None:
        if int(self.n_prbs) != self.n_prbs or self.n_prbs < 1:
            raise ParameterError.from_violations(
                "PrbAllocation", [("n_prbs", f"must be a positive integer, got {self.n_prbs}")])

    @property
    def n_subcarriers(self) -> int:
        return self.n_prbs * SUBCARRIERS_PER_PRB

    @property
    def n_symbols(self) -> int:
        return SYMBOLS_PER_SLOT

    def check_fits(self, ofdm: OfdmConfig) -> None:
        if self.n_subcarriers > ofdm.n_subcarriers:
            raise ParameterError.from_violations(
                "PrbAllocation",
                [("n_prbs", f"{self.n_subcarriers} subcarriers exceed N={ofdm.n_subcarriers}")])

    def fft_bins(self, ofdm: OfdmConfig) -> np.ndarray:
        """FFT bins of the allocated subcarriers, centered on DC."""
        self.check_fits(ofdm)
        k = np.arange(self.n_subcarriers) - self.n_subcarriers // 2
        return np.mod(k, ofdm.n_subcarriers)


@dataclass(frozen=True)
class PtrsConfig:
    """
    Phase-tracking pilot layout.

    Attributes:
        freq_density: One PTRS subcarrier per L PRBs
        time_density: PTRS in every K-th symbol of the slot
        pilot_seed: Seed of the known pilot sequence
        enabled: False leaves the slot without pilots
    """
    freq_density: int = 4
    time_density: int = 1
    pilot_seed: int = 0
    enabled: bool = True

    def __post_init__(self) -> None:
        violations = []
        if self.freq_density not in FREQ_DENSITIES:
            violations.append(("freq_density", f"must be one of {FREQ_DENSITIES}"))
        if self.time_density not in TIME_DENSITIES:
            violations.append(("time_density", f"must be one of {TIME_DENSITIES}"))
        raise_if_violations("PtrsConfig", violations)

    @classmethod
    def from_dict(cls, data: Dict) -> "PtrsConfig":
        return cls(**data)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ChannelRealization:
    """
    Per-subcarrier MIMO channel.

    Attributes:
        blocks: (N, n_rx, n_tx) complex array, block k is H_k
        kind: 'flat-awgn', 'rayleigh' or 'user'
    """
    blocks: np.ndarray
    kind: str = "user"

    def __post_init__(self) -> None:
        blocks = np.array(self.blocks, dtype=np.complex128)
        violations = []
        if blocks.ndim != 3:
            violations.append(("blocks", f"must be (N, n_rx, n_tx), got shape {blocks.shape}"))
        elif not np.all(np.isfinite(blocks)):
            violations.append(("blocks", "must be finite"))
        if self.kind not in CHANNEL_KINDS:
            violations.append(("kind", f"must be one of {CHANNEL_KINDS}"))
        raise_if_violations("ChannelRealization", violations)
        blocks.flags.writeable = False
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def flat(cls, n_subcarriers: int, n_rx: int = 1, n_tx: int = 1) -> "ChannelRealization":
        """Identity-like channel: ones on the diagonal of every block."""
        eye = np.eye(n_rx, n_tx, dtype=np.complex128)
        if n_rx != n_tx:
            eye = np.ones((n_rx, n_tx), dtype=np.complex128)
        return cls(np.broadcast_to(eye, (n_subcarriers, n_rx, n_tx)), "flat-awgn")

    @classmethod
    def rayleigh(cls, n_subcarriers: int, n_rx: int, n_tx: int,
                 rng: RngStream) -> "ChannelRealization":
        """Independent CN(0, 1) entries on every subcarrier."""
        return cls(gaussian_array(rng, (n_subcarriers, n_rx, n_tx), 1.0), "rayleigh")

    @classmethod
    def from_blocks(cls, blocks) -> "ChannelRealization":
        return cls(np.asarray(blocks), "user")

    @property
    def n_subcarriers(self) -> int:
        return self.blocks.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        """(n_rx, n_tx)"""
        return self.blocks.shape[1], self.blocks.shape[2]


@dataclass(frozen=True)
class LinkExperiment:
    """
    Everything run_bler needs for one BLER curve.

    Attributes:
        ofdm: Numerology (n_tx must be 1)
        allocation: PRBs carrying one transport block per slot
        ptrs: Pilot layout
        phase_noise: Pole/zero PN model, None for an ideal oscillator
        carrier_hz: Carrier the PN model is scaled to (defaults to its base)
        pn_sides: 'tx', 'rx' or 'both'
        channel: 'flat-awgn' or 'rayleigh'
        snr_db: SNR points (per data resource element)
        trials: Transport blocks per SNR point
        fec: 'convolutional' or 'uncoded'
        correct_cpe: Apply PTRS-based CPE correction
        block_bits: Information bits per block, None to fill the slot
        threads: Worker threads for trial batches
    """
    ofdm: OfdmConfig
    allocation: PrbAllocation
    ptrs: PtrsConfig
    phase_noise: Optional[object] = None
    carrier_hz: Optional[float] = None
    pn_sides: str = "both"
    channel: str = "flat-awgn"
    snr_db: Tuple[float, ...] = (10.0,)
    trials: int = 100
    fec: str = "convolutional"
    correct_cpe: bool = True
    block_bits: Optional[int] = None
    threads: int = 1

    def __post_init__(self) -> None:
        violations = []
        if self.pn_sides not in ("tx", "rx", "both"):
            violations.append(("pn_sides", "must be 'tx', 'rx' or 'both'"))
        if self.channel not in ("flat-awgn", "rayleigh"):
            violations.append(("channel", "must be 'flat-awgn' or 'rayleigh'"))
        if self.trials < 1:
            violations.append(("trials", "must be at least 1"))
        if len(self.snr_db) == 0:
            violations.append(("snr_db", "at least one SNR point is required"))
        if self.fec not in ("convolutional", "uncoded"):
            violations.append(("fec", "must be 'convolutional' or 'uncoded'"))
        if self.threads < 1:
            violations.append(("threads", "must be at least 1"))
        if self.allocation.n_subcarriers > self.ofdm.n_subcarriers:
            violations.append(("allocation.n_prbs", "allocation exceeds the FFT size"))
        raise_if_violations("LinkExperiment", violations)
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
