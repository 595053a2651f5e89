"""
Complex sample buffers, reproducible random streams and unit conversions.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from ..errors import DomainError, ParameterError, raise_if_violations

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ComplexSequence:
    """
    Complex baseband samples with their sample rate.

    Attributes:
        samples: 1-D complex128 array (read-only view)
        sample_rate_hz: Sample rate in Hz
    """
    samples: np.ndarray
    sample_rate_hz: float = 1.0

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.complex128).reshape(-1)
        violations = []
        if not np.isfinite(self.sample_rate_hz) or self.sample_rate_hz <= 0:
            violations.append(("sample_rate_hz", "must be positive and finite"))
        if not np.all(np.isfinite(samples)):
            violations.append(("samples", "must all be finite (no NaN/Inf)"))
        raise_if_violations("ComplexSequence", violations)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    def mean_power(self) -> float:
        """Time-domain mean square power."""
        if self.samples.size == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass
class RngStream:
    """
    Reproducible random stream identified by (seed, stream_id).

    Distinct stream ids under one seed are independent; the same pair
    always reproduces the same draws. Streams are stateful and must not be
    shared between units of parallel work.

    Attributes:
        seed: Root entropy
        stream_id: Index among siblings
        parents: Stream ids of the ancestors this stream was derived from
    """
    seed: int
    stream_id: int = 0
    parents: Tuple[int, ...] = ()
    _generator: Optional[np.random.Generator] = field(default=None, init=False, repr=False,
                                                      compare=False)

    def __post_init__(self) -> None:
        violations = []
        if int(self.stream_id) < 0:
            violations.append(("stream_id", "must be non-negative"))
        if not 0 <= int(self.seed) < 2 ** 64:
            violations.append(("seed", "must fit in an unsigned 64-bit integer"))
        raise_if_violations("RngStream", violations)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            key = tuple(int(p) for p in self.parents) + (int(self.stream_id),)
            seq = np.random.SeedSequence(int(self.seed), spawn_key=key)
            self._generator = np.random.default_rng(seq)
        return self._generator

    def spawn(self, stream_id: int) -> "RngStream":
        """Sibling stream under the same seed."""
        return RngStream(self.seed, stream_id, self.parents)

    def child(self, index: int) -> "RngStream":
        """
        Stream nested under this one.

        Children of distinct streams never coincide with each other or with
        any sibling.
        """
        return RngStream(self.seed, index, self.parents + (int(self.stream_id),))


def gaussian_complex(rng: RngStream, n: int, variance: float,
                     sample_rate_hz: float = 1.0) -> ComplexSequence:
    """
    Draw circularly-symmetric complex Gaussian samples CN(0, variance).

    Args:
        rng: Random stream to draw from
        n: Number of samples
        variance: Total complex variance (each quadrature gets variance/2)
        sample_rate_hz: Sample rate attached to the result

    Raises:
        ParameterError: If n or variance is negative
    """
    if n < 0:
        raise ParameterError(f"Sample count must be non-negative, got {n}")
    if variance < 0 or not np.isfinite(variance):
        raise ParameterError(f"Variance must be non-negative, got {variance}")
    return ComplexSequence(gaussian_array(rng, (n,), variance), sample_rate_hz)


def gaussian_array(rng: RngStream, shape, variance: float) -> np.ndarray:
    """CN(0, variance) draws of arbitrary shape, as a raw array."""
    gen = rng.generator
    scale = np.sqrt(variance / 2.0)
    return scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))


def to_db(value: ArrayLike) -> ArrayLike:
    """10*log10 of a strictly positive power ratio."""
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"Cannot convert non-positive value(s) to dB: {value}")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def from_db(value_db: ArrayLike) -> ArrayLike:
    """Inverse of to_db."""
    out = np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def power_db_floor(value: ArrayLike) -> np.ndarray:
    """10*log10 that maps zeros to -inf instead of raising."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def db_lin_convert(value: float, direction: str) -> float:
    """
    Convert between linear power ratios and dB.

    Args:
        value: Value to convert
        direction: 'to_db' or 'to_linear'

    Raises:
        DomainError: If converting a non-positive value to dB
        ParameterError: If the direction is unknown
    """
    key = direction.lower().replace("-", "_")
    if key == "to_db":
        return to_db(value)
    if key == "to_linear":
        return from_db(value)
    logging.debug(f"Rejected conversion direction {direction!r}")
    raise ParameterError(f"Unknown conversion direction: {direction}")
