"""
Analytic phase-noise PSD models: multi pole/zero plateau model, carrier
scaling and piecewise power-law source descriptions.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from ..errors import DomainError, ParameterError, raise_if_violations

MHZ = 1.0e6
GHZ = 1.0e9

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PoleZeroPnParams:
    """
    Pole/zero phase-noise model parameters.

    Attributes:
        psd0_dbc_hz: Low-offset plateau level (dBc/Hz)
        poles_mhz: Pole corner frequencies (MHz)
        zeros_mhz: Zero corner frequencies (MHz), one per pole
        base_carrier_hz: Carrier the plateau level refers to (Hz)
    """
    psd0_dbc_hz: float
    poles_mhz: Tuple[float, ...]
    zeros_mhz: Tuple[float, ...]
    base_carrier_hz: float

    def __post_init__(self) -> None:
        poles = tuple(float(p) for p in self.poles_mhz)
        zeros = tuple(float(z) for z in self.zeros_mhz)
        violations = []
        if not np.isfinite(self.psd0_dbc_hz):
            violations.append(("psd0_dbc_hz", "must be finite"))
        if len(poles) == 0:
            violations.append(("poles_mhz", "at least one pole/zero pair is required"))
        if len(poles) != len(zeros):
            violations.append(("zeros_mhz", f"{len(zeros)} zeros for {len(poles)} poles"))
        for name, values in (("poles_mhz", poles), ("zeros_mhz", zeros)):
            for i, v in enumerate(values):
                if not (np.isfinite(v) and v > 0):
                    violations.append((f"{name}[{i}]", f"must be positive and finite, got {v}"))
        if not (np.isfinite(self.base_carrier_hz) and self.base_carrier_hz > 0):
            violations.append(("base_carrier_hz", "must be positive"))
        raise_if_violations("PoleZeroPnParams", violations)
        object.__setattr__(self, "poles_mhz", poles)
        object.__setattr__(self, "zeros_mhz", zeros)
        object.__setattr__(self, "base_carrier_hz", float(self.base_carrier_hz))

    @property
    def poles_hz(self) -> np.ndarray:
        return np.asarray(self.poles_mhz) * MHZ

    @property
    def zeros_hz(self) -> np.ndarray:
        return np.asarray(self.zeros_mhz) * MHZ

    def to_dict(self) -> Dict:
        return {
            "psd0_dbc_hz": self.psd0_dbc_hz,
            "poles_mhz": list(self.poles_mhz),
            "zeros_mhz": list(self.zeros_mhz),
            "base_carrier_ghz": self.base_carrier_hz / GHZ,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "PoleZeroPnParams":
        """Build from a config mapping (base carrier in GHz)."""
        missing = [k for k in ("psd0_dbc_hz", "poles_mhz", "zeros_mhz", "base_carrier_ghz")
                   if k not in data]
        if missing:
            raise ParameterError.from_violations(
                "phase-noise parameters", [(k, "missing") for k in missing])
        return cls(
            psd0_dbc_hz=float(data["psd0_dbc_hz"]),
            poles_mhz=tuple(data["poles_mhz"]),
            zeros_mhz=tuple(data["zeros_mhz"]),
            base_carrier_hz=float(data["base_carrier_ghz"]) * GHZ,
        )

    def psd_dbc_hz(self, offset_hz: ArrayLike, carrier_hz: float = None) -> ArrayLike:
        """Shortcut for eval_pole_zero_psd (defaults to the base carrier)."""
        carrier = self.base_carrier_hz if carrier_hz is None else carrier_hz
        return eval_pole_zero_psd(self, offset_hz, carrier)


# Example parameter sets at 30 GHz and 60 GHz
SET_A = PoleZeroPnParams(
    psd0_dbc_hz=-79.4,
    poles_mhz=(0.1, 0.2, 8.0),
    zeros_mhz=(1.8, 2.2, 40.0),
    base_carrier_hz=30.0 * GHZ,
)
SET_B = PoleZeroPnParams(
    psd0_dbc_hz=-70.0,
    poles_mhz=(0.005, 0.4, 0.6),
    zeros_mhz=(0.02, 6.0, 10.0),
    base_carrier_hz=60.0 * GHZ,
)

PRESETS: Dict[str, PoleZeroPnParams] = {"set-a": SET_A, "set-b": SET_B}


def carrier_scale_db(carrier_hz: float, base_carrier_hz: float) -> float:
    """
    PSD shift when moving a phase-noise profile to another carrier.

    Raises:
        DomainError: If either frequency is not positive
    """
    if not (carrier_hz > 0 and base_carrier_hz > 0):
        raise DomainError(
            f"Carrier frequencies must be positive, got {carrier_hz} and {base_carrier_hz}")
    return float(20.0 * np.log10(carrier_hz / base_carrier_hz))


def pole_zero_shape(params: PoleZeroPnParams, offset_hz: ArrayLike) -> np.ndarray:
    """Linear product of (1+(f/fz)^2)/(1+(f/fp)^2) over all pairs."""
    f = np.abs(np.asarray(offset_hz, dtype=float))[..., None]
    num = 1.0 + (f / params.zeros_hz) ** 2
    den = 1.0 + (f / params.poles_hz) ** 2
    return np.prod(num / den, axis=-1)


def eval_pole_zero_psd(params: PoleZeroPnParams, offset_hz: ArrayLike,
                       carrier_hz: float) -> ArrayLike:
    """
    Evaluate the pole/zero phase-noise PSD at the given offsets.

    Args:
        params: Model parameters
        offset_hz: Offset frequency or array of offsets (Hz); the model is even in f
        carrier_hz: Carrier frequency (Hz)

    Returns:
        Level in dBc/Hz, scalar for scalar input

    Raises:
        DomainError: If the carrier is not positive
    """
    shift = carrier_scale_db(carrier_hz, params.base_carrier_hz)
    out = params.psd0_dbc_hz + 10.0 * np.log10(pole_zero_shape(params, offset_hz)) + shift
    return float(out) if np.ndim(out) == 0 else out


def scaled_to(params: PoleZeroPnParams, carrier_hz: float,
              offsets_hz: Sequence[float]) -> np.ndarray:
    """PSD curve of a profile moved to a new carrier."""
    return np.asarray(eval_pole_zero_psd(params, np.asarray(offsets_hz), carrier_hz))


@dataclass(frozen=True)
class PowerLawPsd:
    """
    Piecewise power-law PSD through (offset_hz, dbc_hz) points.

    Levels are interpolated linearly in log-frequency. Outside the points
    the end segments are extended; with a single point the curve is a
    straight line of slope_db_per_decade through it.
    """
    points: Tuple[Tuple[float, float], ...]
    slope_db_per_decade: float = 0.0

    def __post_init__(self) -> None:
        pts = tuple(sorted((float(f), float(v)) for f, v in self.points))
        violations = []
        if not pts:
            violations.append(("points", "at least one (offset_hz, dbc_hz) point is required"))
        for i, (f, v) in enumerate(pts):
            if not (f > 0 and np.isfinite(f) and np.isfinite(v)):
                violations.append((f"points[{i}]", "offset must be positive and level finite"))
        if len({f for f, _ in pts}) != len(pts):
            violations.append(("points", "offsets must be distinct"))
        raise_if_violations("PowerLawPsd", violations)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_dict(cls, data: Dict) -> "PowerLawPsd":
        return cls(tuple(tuple(p) for p in data["points"]),
                   float(data.get("slope_db_per_decade", 0.0)))

    def to_dict(self) -> Dict:
        return {"points": [list(p) for p in self.points],
                "slope_db_per_decade": self.slope_db_per_decade}

    def psd_dbc_hz(self, offset_hz: ArrayLike, carrier_hz: float = None) -> ArrayLike:
        logf = np.log10(np.maximum(np.abs(np.asarray(offset_hz, dtype=float)), 1e-30))
        xs = np.log10([f for f, _ in self.points])
        ys = np.array([v for _, v in self.points])
        if xs.size == 1:
            out = ys[0] + self.slope_db_per_decade * (logf - xs[0])
        else:
            out = np.interp(logf, xs, ys)
            lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out = np.where(logf < xs[0], ys[0] + lo_slope * (logf - xs[0]), out)
            out = np.where(logf > xs[-1], ys[-1] + hi_slope * (logf - xs[-1]), out)
        return float(out) if np.ndim(out) == 0 else out


PnSource = Union[PoleZeroPnParams, PowerLawPsd]


def source_from_dict(data: Dict) -> PnSource:
    """Decode a source PSD block: pole/zero keys or a power-law point list."""
    if data is None:
        return None
    if "points" in data:
        return PowerLawPsd.from_dict(data)
    return PoleZeroPnParams.from_dict(data)


def integrated_phase_variance(params: PoleZeroPnParams, carrier_hz: float, f_lo: float,
                              f_hi: float, n_points: int = 20000) -> float:
    """
    Integral of the two-sided linear PSD over f_lo <= |f| <= f_hi (rad^2).

    Integrates on a logarithmic grid that always includes f_lo, so
    f_lo = 0 covers the whole plateau.
    """
    if not 0 <= f_lo < f_hi:
        raise ParameterError(f"Need 0 <= f_lo < f_hi, got {f_lo}, {f_hi}")
    smallest = min(np.min(params.poles_hz), np.min(params.zeros_hz))
    start = max(f_lo, smallest * 1e-4)
    grid = np.geomspace(start, f_hi, n_points)
    if f_lo < start:
        grid = np.concatenate([[f_lo], grid])
    psd_lin = np.power(10.0, np.asarray(eval_pole_zero_psd(params, grid, carrier_hz)) / 10.0)
    variance = 2.0 * trapezoid(psd_lin, grid)
    logging.debug(f"Integrated phase variance {variance:.4e} rad^2 over [{f_lo}, {f_hi}] Hz")
    return float(variance)


def corner_frequencies_hz(params: PoleZeroPnParams) -> List[Tuple[str, float]]:
    """Named corners, e.g. ('poles_mhz[2]', 8e6)."""
    named = [(f"poles_mhz[{i}]", p * MHZ) for i, p in enumerate(params.poles_mhz)]
    named += [(f"zeros_mhz[{i}]", z * MHZ) for i, z in enumerate(params.zeros_mhz)]
    return named
