"""
PSD-domain combiner for PLL-based oscillators.

The output phase is

    theta_out = [N K_vco Z (theta_ref + K_d theta_lp) + s N theta_vco] / (s N + K_d K_vco Z)

and the three sources are independent, so the output PSD is the sum of
|H_i(j 2 pi f)|^2 S_i(f).
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from ..errors import NumericalError, ParameterError, raise_if_violations
from .models import PnSource, source_from_dict

SOURCE_NAMES = ("ref", "lp", "vco")


@dataclass(frozen=True)
class PllPnParams:
    """
    PLL loop parameters and its three noise sources.

    Attributes:
        kd: Phase-frequency detector gain
        kvco: VCO sensitivity (rad/s per unit control)
        nd: Divider ratio
        loop_filter_num: Z(s) numerator coefficients, highest power first
        loop_filter_den: Z(s) denominator coefficients, highest power first
        ref_psd / lp_psd / vco_psd: Source PSDs, None for a silent source
    """
    kd: float
    kvco: float
    nd: float
    loop_filter_num: Tuple[float, ...]
    loop_filter_den: Tuple[float, ...]
    ref_psd: Optional[PnSource] = None
    lp_psd: Optional[PnSource] = None
    vco_psd: Optional[PnSource] = None

    def __post_init__(self) -> None:
        num = tuple(float(c) for c in self.loop_filter_num)
        den = tuple(float(c) for c in self.loop_filter_den)
        violations = []
        if not (np.isfinite(self.nd) and self.nd > 0):
            violations.append(("nd", "divider ratio must be positive"))
        for name in ("kd", "kvco"):
            if not np.isfinite(getattr(self, name)):
                violations.append((name, "must be finite"))
        if not num:
            violations.append(("loop_filter_num", "at least one coefficient is required"))
        if not den or not np.any(np.asarray(den) != 0):
            violations.append(("loop_filter_den", "denominator must not be identically zero"))
        raise_if_violations("PllPnParams", violations)
        object.__setattr__(self, "loop_filter_num", num)
        object.__setattr__(self, "loop_filter_den", den)

    @property
    def sources(self) -> Dict[str, Optional[PnSource]]:
        return {"ref": self.ref_psd, "lp": self.lp_psd, "vco": self.vco_psd}

    @classmethod
    def from_dict(cls, data: Dict) -> "PllPnParams":
        """Decode a `pll` config block."""
        try:
            sources = data.get("sources", {}) or {}
            return cls(
                kd=float(data["kd"]),
                kvco=float(data["kvco"]),
                nd=float(data["nd"]),
                loop_filter_num=tuple(data["loop_filter"]["num"]),
                loop_filter_den=tuple(data["loop_filter"]["den"]),
                ref_psd=source_from_dict(sources.get("ref")),
                lp_psd=source_from_dict(sources.get("lp")),
                vco_psd=source_from_dict(sources.get("vco")),
            )
        except KeyError as e:
            raise ParameterError.from_violations("pll block", [(str(e.args[0]), "missing")])


def _polyval_checked(coeffs: Tuple[float, ...], s: np.ndarray, label: str) -> np.ndarray:
    value = np.polyval(coeffs, s)
    powers = np.arange(len(coeffs) - 1, -1, -1)
    scale = np.sum(np.abs(np.asarray(coeffs))[:, None] * np.abs(s)[None, :] ** powers[:, None],
                   axis=0)
    singular = (~np.isfinite(value)) | (np.abs(value) <= 1e-12 * scale)
    if np.any(singular):
        bad = np.abs(s[singular][0]) / (2 * np.pi)
        raise NumericalError(f"{label} is singular at {bad:.6g} Hz")
    return value


def pll_transfer(params: PllPnParams, offset_hz: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Complex transfer functions from each source to the output phase.

    Raises:
        NumericalError: If Z(s) or the closed-loop denominator is singular
    """
    f = np.atleast_1d(np.asarray(offset_hz, dtype=float))
    if np.any(f <= 0):
        raise ParameterError("PLL offsets must be positive")
    s = 2j * np.pi * f
    z_num = np.polyval(params.loop_filter_num, s)
    z_den = _polyval_checked(params.loop_filter_den, s, "loop filter denominator")
    z = z_num / z_den
    loop = s * params.nd
    forward = params.kd * params.kvco * z
    closed = loop + forward
    if np.any(~np.isfinite(closed)) or np.any(np.abs(closed) <= 1e-12 * (np.abs(loop)
                                                                       + np.abs(forward))):
        raise NumericalError("Closed-loop denominator s*N + Kd*Kvco*Z(s) is singular")
    h_ref = params.nd * params.kvco * z / closed
    return {"ref": h_ref, "lp": params.kd * h_ref, "vco": loop / closed}


def pll_contributions_linear(params: PllPnParams, offset_hz: np.ndarray) -> Dict[str, np.ndarray]:
    """Per-source output PSD contributions, linear rad^2/Hz."""
    f = np.atleast_1d(np.asarray(offset_hz, dtype=float))
    transfers = pll_transfer(params, f)
    out = {}
    for name, source in params.sources.items():
        if source is None:
            out[name] = np.zeros_like(f)
            continue
        src_lin = np.power(10.0, np.asarray(source.psd_dbc_hz(f)) / 10.0)
        out[name] = np.abs(transfers[name]) ** 2 * src_lin
    return out


def eval_pll_psd(params: PllPnParams, offset_hz):
    """
    Output phase-noise PSD of the PLL in dBc/Hz.

    Args:
        params: Loop and source description
        offset_hz: Positive offset or array of offsets (Hz)

    Returns:
        dBc/Hz; -inf when every source is silent

    Raises:
        NumericalError: If the loop filter is singular at a requested offset
    """
    contributions = pll_contributions_linear(params, offset_hz)
    total = sum(contributions.values())
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(total)
    return float(out[0]) if np.ndim(offset_hz) == 0 else out


def open_loop_gain(params: PllPnParams, offset_hz: np.ndarray) -> np.ndarray:
    f = np.atleast_1d(np.asarray(offset_hz, dtype=float))
    s = 2j * np.pi * f
    z = np.polyval(params.loop_filter_num, s) / _polyval_checked(
        params.loop_filter_den, s, "loop filter denominator")
    return params.kd * params.kvco * z / (s * params.nd)


def loop_bandwidth_hz(params: PllPnParams, f_min: float = 1e-3, f_max: float = 1e13) -> float:
    """
    Unity-gain crossover of the open loop Kd*Kvco*Z(s)/(s*N).

    Raises:
        NumericalError: If |G| does not cross unity inside [f_min, f_max]
    """
    def log_gain(log_f: float) -> float:
        return float(np.log10(np.abs(open_loop_gain(params, 10.0 ** log_f))[0]))

    lo, hi = np.log10(f_min), np.log10(f_max)
    if np.sign(log_gain(lo)) == np.sign(log_gain(hi)):
        raise NumericalError(f"Open-loop gain does not cross unity in [{f_min}, {f_max}] Hz")
    crossover = 10.0 ** brentq(log_gain, lo, hi, xtol=1e-9)
    logging.debug(f"PLL loop bandwidth {crossover:.6g} Hz")
    return float(crossover)
