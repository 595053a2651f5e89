"""
Gray-mapped QAM and the forward-error-correction interface.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..errors import ConfigurationError, ParameterError
from .config import MODULATION_BITS

UNREACHED_METRIC = 2 ** 28


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def _gray_inverse(g: np.ndarray) -> np.ndarray:
    n = g.copy()
    shift = g >> 1
    while np.any(shift):
        n ^= shift
        shift >>= 1
    return n


@dataclass(frozen=True)
class QamModem:
    """
    Square Gray-coded QAM with unit average symbol power.

    The first half of each symbol's bits (MSB first) select the in-phase
    level, the second half the quadrature level.
    """
    modulation: str = "QPSK"

    def __post_init__(self) -> None:
        if self.modulation not in MODULATION_BITS:
            raise ParameterError(f"Unknown modulation {self.modulation!r}",
                                 [("modulation", f"must be one of {sorted(MODULATION_BITS)}")])

    @property
    def bits_per_symbol(self) -> int:
        return MODULATION_BITS[self.modulation]

    @property
    def levels(self) -> int:
        return 2 ** (self.bits_per_symbol // 2)

    @property
    def scale(self) -> float:
        return float(np.sqrt(2.0 * (self.levels ** 2 - 1) / 3.0))

    def _axis_bits_to_amplitude(self, bits: np.ndarray) -> np.ndarray:
        half = self.bits_per_symbol // 2
        weights = 1 << np.arange(half - 1, -1, -1)
        index = _gray_inverse(bits @ weights)
        return 2 * index - (self.levels - 1)

    def modulate(self, bits: np.ndarray) -> np.ndarray:
        """
        Map bits to symbols.

        Raises:
            ParameterError: If the bit count is not a multiple of bits_per_symbol
        """
        m = self.bits_per_symbol
        bits = np.asarray(bits, dtype=np.int64)
        if bits.shape[-1] % m:
            raise ParameterError(f"{bits.shape[-1]} bits do not fill {m}-bit symbols")
        groups = bits.reshape(bits.shape[:-1] + (-1, m))
        i = self._axis_bits_to_amplitude(groups[..., :m // 2])
        q = self._axis_bits_to_amplitude(groups[..., m // 2:])
        return (i + 1j * q) / self.scale

    def _amplitude_to_axis_bits(self, amplitude: np.ndarray) -> np.ndarray:
        half = self.bits_per_symbol // 2
        index = np.clip(np.rint((amplitude * self.scale + self.levels - 1) / 2.0),
                        0, self.levels - 1).astype(np.int64)
        code = _gray(index)
        return (code[..., None] >> np.arange(half - 1, -1, -1)) & 1

    def demodulate(self, symbols: np.ndarray) -> np.ndarray:
        """Hard decisions, nearest constellation point per axis."""
        symbols = np.asarray(symbols)
        i = self._amplitude_to_axis_bits(symbols.real)
        q = self._amplitude_to_axis_bits(symbols.imag)
        bits = np.concatenate([i, q], axis=-1)
        return bits.reshape(bits.shape[:-2] + (-1,))

    def constellation(self) -> np.ndarray:
        m = self.bits_per_symbol
        values = np.arange(2 ** m)
        bits = (values[:, None] >> np.arange(m - 1, -1, -1)) & 1
        return self.modulate(bits.reshape(-1))


class UncodedFec:
    """Pass-through code: info bits are the coded bits."""
    name = "uncoded"

    def info_length(self, coded_capacity: int) -> int:
        return int(coded_capacity)

    def coded_length(self, info_bits: int) -> int:
        return int(info_bits)

    def encode(self, bits: np.ndarray) -> np.ndarray:
        return np.asarray(bits, dtype=np.uint8)

    def decode(self, coded: np.ndarray, info_bits: int) -> np.ndarray:
        return np.asarray(coded, dtype=np.uint8)[..., :info_bits]


@dataclass
class ConvolutionalCode:
    """
    Rate-1/2 feed-forward convolutional code, zero-tail terminated, with a
    batched hard-decision Viterbi decoder.

    Attributes:
        constraint_length: K (state count 2^(K-1))
        generators: Octal generator polynomials, MSB on the current input
    """
    constraint_length: int = 7
    generators: Tuple[int, int] = (0o133, 0o171)
    name: str = field(default="convolutional", init=False)

    def __post_init__(self) -> None:
        k = self.constraint_length
        if k < 2 or any(g >= 2 ** k or g < 1 for g in self.generators):
            raise ParameterError("Invalid convolutional code",
                                 [("generators", f"must be non-zero and below 2^{k}")])
        memory = k - 1
        self._memory = memory
        self._n_states = 2 ** memory
        self._taps = np.array([[(g >> (memory - d)) & 1 for d in range(k)]
                               for g in self.generators], dtype=np.uint8)
        states = np.arange(self._n_states)
        inputs = states >> (memory - 1)
        # predecessors of each next state, indexed by the oldest register bit
        base = (states & (self._n_states // 2 - 1)) << 1
        self._prev = np.stack([base, base | 1], axis=1)
        registers = (inputs[:, None] << memory) | self._prev
        self._branch_bits = np.stack(
            [self._parity(registers & g) for g in self.generators], axis=-1).astype(np.uint8)
        # Hamming distance of every received output pattern to every branch, (patterns, states, 2)
        n_out = len(self.generators)
        patterns = (np.arange(2 ** n_out)[:, None] >> np.arange(n_out - 1, -1, -1)) & 1
        self._branch_metric = np.sum(self._branch_bits[None] != patterns[:, None, None, :],
                                     axis=-1).astype(np.int32)

    @staticmethod
    def _parity(values: np.ndarray) -> np.ndarray:
        out = np.zeros_like(values)
        v = values.copy()
        while np.any(v):
            out ^= v & 1
            v >>= 1
        return out

    @property
    def n_outputs(self) -> int:
        return len(self.generators)

    def coded_length(self, info_bits: int) -> int:
        return self.n_outputs * (int(info_bits) + self._memory)

    def info_length(self, coded_capacity: int) -> int:
        return int(coded_capacity) // self.n_outputs - self._memory

    def encode(self, bits: np.ndarray) -> np.ndarray:
        """(..., k) info bits -> (..., 2 (k + K - 1)) coded bits, outputs interleaved."""
        bits = np.asarray(bits, dtype=np.uint8)
        padded = np.concatenate(
            [np.zeros(bits.shape[:-1] + (self._memory,), np.uint8), bits,
             np.zeros(bits.shape[:-1] + (self._memory,), np.uint8)], axis=-1)
        length = bits.shape[-1] + self._memory
        outputs = []
        for taps in self._taps:
            acc = np.zeros(bits.shape[:-1] + (length,), np.uint8)
            for delay, tap in enumerate(taps):
                if tap:
                    start = self._memory - delay
                    acc ^= padded[..., start:start + length]
            outputs.append(acc)
        return np.stack(outputs, axis=-1).reshape(bits.shape[:-1] + (-1,))

    def decode(self, coded: np.ndarray, info_bits: int) -> np.ndarray:
        """
        Hard-decision Viterbi over a batch of terminated blocks.

        Raises:
            ConfigurationError: If the coded length does not match info_bits
        """
        coded = np.asarray(coded, dtype=np.uint8)
        batch_shape = coded.shape[:-1]
        expected = self.coded_length(info_bits)
        if coded.shape[-1] != expected:
            raise ConfigurationError(f"{coded.shape[-1]} coded bits, expected {expected}")
        received = coded.reshape((-1, info_bits + self._memory, self.n_outputs))
        n_batch, n_steps = received.shape[:2]
        weights = 1 << np.arange(self.n_outputs - 1, -1, -1)
        patterns = np.ascontiguousarray((received.astype(np.intp) @ weights).T)
        metric = np.full((n_batch, self._n_states), UNREACHED_METRIC, np.int32)
        metric[:, 0] = 0
        # survivor choices packed eight states per byte
        decisions = np.empty((n_steps, n_batch, (self._n_states + 7) // 8), dtype=np.uint8)
        for t in range(n_steps):
            candidates = metric[:, self._prev] + self._branch_metric[patterns[t]]
            decisions[t] = np.packbits(candidates[..., 1] < candidates[..., 0], axis=-1)
            metric = np.minimum(candidates[..., 0], candidates[..., 1])
        state = np.zeros(n_batch, dtype=np.intp)
        rows = np.arange(n_batch)
        decoded = np.empty((n_batch, n_steps), dtype=np.uint8)
        for t in range(n_steps - 1, -1, -1):
            decoded[:, t] = state >> (self._memory - 1)
            choice = (decisions[t, rows, state >> 3] >> (7 - (state & 7))) & 1
            state = self._prev[state, choice]
        return decoded[:, :info_bits].reshape(batch_shape + (info_bits,))


def make_fec(name: str):
    if name == "convolutional":
        return ConvolutionalCode()
    if name == "uncoded":
        return UncodedFec()
    raise ParameterError(f"Unknown FEC {name!r}", [("fec", "must be 'convolutional' or 'uncoded'")])
