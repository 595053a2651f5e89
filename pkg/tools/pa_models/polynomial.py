"""
Memoryless third-order PA polynomial and its Bussgang decomposition.

For x ~ CN(0, s2) and y = t1*x + t2*x*|x|^2 the linear part is
alpha = E[y x*]/s2 = t1 + 2*t2*s2 and w = y - alpha*x is uncorrelated with x.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ParameterError, raise_if_violations
from ..signal_core import ComplexSequence, RngStream, gaussian_array

AS_PRINTED = "as-printed"
MC_ORACLE = "mc-oracle"
GAUSSIAN_MOMENT = "gaussian-moment"
DISTORTION_FORMULAS = (AS_PRINTED, MC_ORACLE, GAUSSIAN_MOMENT)

MC_CHUNK = 2 ** 20
MC_MIN_SAMPLES = 10 ** 4
CI_Z = 1.96


@dataclass(frozen=True)
class Poly3Params:
    """y = theta1*x + theta2*x*|x|^2"""
    theta1: complex
    theta2: complex = 0j

    def __post_init__(self) -> None:
        violations = []
        for name in ("theta1", "theta2"):
            if not np.isfinite(complex(getattr(self, name))):
                violations.append((name, "must be finite"))
        raise_if_violations("Poly3Params", violations)
        object.__setattr__(self, "theta1", complex(self.theta1))
        object.__setattr__(self, "theta2", complex(self.theta2))

    @classmethod
    def gain_phase(cls, gain_db: float, phase_deg: float) -> "Poly3Params":
        """Static multiplicative gain and phase error (no compression)."""
        return cls(10 ** (gain_db / 20.0) * np.exp(1j * np.deg2rad(phase_deg)), 0j)

    @classmethod
    def from_dict(cls, data) -> "Poly3Params":
        return cls(_as_complex(data.get("theta1", 1.0)), _as_complex(data.get("theta2", 0.0)))


@dataclass(frozen=True)
class BussgangParams:
    """Bussgang gain and distortion power at a given Gaussian input power."""
    alpha: complex
    sigma_w2: float
    sigma_x2: float

    def __post_init__(self) -> None:
        violations = []
        if not self.sigma_w2 >= 0:
            violations.append(("sigma_w2", "must be non-negative"))
        if not self.sigma_x2 > 0:
            violations.append(("sigma_x2", "must be positive"))
        raise_if_violations("BussgangParams", violations)


@dataclass
class DistortionPowerResult:
    """
    Distortion power with its provenance.

    Attributes:
        value: sigma_w^2
        formula: One of DISTORTION_FORMULAS
        ci_halfwidth: 95% confidence half-width (Monte-Carlo only, else 0)
        n_samples: Draws used (Monte-Carlo only, else 0)
        warnings: Accuracy warnings
    """
    value: float
    formula: str
    ci_halfwidth: float = 0.0
    n_samples: int = 0
    warnings: List[str] = field(default_factory=list)


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _check_power(sigma_x2: float) -> None:
    if not (np.isfinite(sigma_x2) and sigma_x2 > 0):
        raise ParameterError(f"Input power must be positive, got {sigma_x2}",
                             [("sigma_x2", "must be positive")])


def poly3_samples(params: Poly3Params, x: np.ndarray) -> np.ndarray:
    return params.theta1 * x + params.theta2 * x * np.abs(x) ** 2


def apply_poly3(params: Poly3Params, x: ComplexSequence) -> ComplexSequence:
    """Memoryless cubic PA applied sample by sample."""
    return ComplexSequence(poly3_samples(params, x.samples), x.sample_rate_hz)


def bussgang_alpha(params: Poly3Params, sigma_x2: float) -> complex:
    """
    Bussgang gain theta1 + 2*theta2*sigma_x2.

    Raises:
        ParameterError: If sigma_x2 is not positive
    """
    _check_power(sigma_x2)
    return params.theta1 + 2.0 * params.theta2 * sigma_x2


def bussgang_distortion_power(params: Poly3Params, sigma_x2: float, formula: str = AS_PRINTED,
                              n_samples: int = 10 ** 6,
                              rng: Optional[RngStream] = None) -> DistortionPowerResult:
    """
    Distortion power E|y - alpha*x|^2 under CN(0, sigma_x2) input.

    Args:
        params: Cubic PA coefficients
        sigma_x2: Input power
        formula: 'as-printed' for 2|t2|^2 (3 s^6 + 2 s^8), 'gaussian-moment' for
            the closed form 2|t2|^2 s^6, 'mc-oracle' for a sample estimate
        n_samples: Monte-Carlo draws
        rng: Random stream for the Monte-Carlo draws (seed 0 if omitted)

    Raises:
        ParameterError: If sigma_x2 is not positive or the formula is unknown
    """
    _check_power(sigma_x2)
    t2 = abs(params.theta2) ** 2
    if formula == AS_PRINTED:
        return DistortionPowerResult(2.0 * t2 * (3.0 * sigma_x2 ** 3 + 2.0 * sigma_x2 ** 4),
                                     AS_PRINTED)
    if formula == GAUSSIAN_MOMENT:
        return DistortionPowerResult(2.0 * t2 * sigma_x2 ** 3, GAUSSIAN_MOMENT)
    if formula != MC_ORACLE:
        raise ParameterError(f"Unknown distortion formula {formula!r}",
                             [("formula", f"must be one of {DISTORTION_FORMULAS}")])
    if n_samples < 2:
        raise ParameterError(f"Monte-Carlo needs at least 2 samples, got {n_samples}")

    rng = rng if rng is not None else RngStream(0)
    alpha = bussgang_alpha(params, sigma_x2)
    total = 0.0
    total_sq = 0.0
    remaining = int(n_samples)
    while remaining > 0:
        chunk = min(MC_CHUNK, remaining)
        x = gaussian_array(rng, (chunk,), sigma_x2)
        w2 = np.abs(poly3_samples(params, x) - alpha * x) ** 2
        total += float(np.sum(w2))
        total_sq += float(np.sum(w2 ** 2))
        remaining -= chunk

    mean = total / n_samples
    var = max(total_sq / n_samples - mean ** 2, 0.0) * n_samples / (n_samples - 1)
    result = DistortionPowerResult(mean, MC_ORACLE, CI_Z * np.sqrt(var / n_samples), n_samples)
    if n_samples < MC_MIN_SAMPLES:
        msg = f"Monte-Carlo estimate uses only {n_samples} samples (< {MC_MIN_SAMPLES})"
        logging.warning(msg)
        result.warnings.append(msg)
    logging.debug(f"MC distortion power {mean:.6g} +/- {result.ci_halfwidth:.2g}")
    return result


def bussgang_decompose(params: Poly3Params, sigma_x2: float, formula: str = AS_PRINTED,
                       **mc_kwargs) -> BussgangParams:
    """alpha and sigma_w^2 bundled for one input power."""
    power = bussgang_distortion_power(params, sigma_x2, formula, **mc_kwargs)
    return BussgangParams(bussgang_alpha(params, sigma_x2), power.value, float(sigma_x2))
