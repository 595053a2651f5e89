import logging
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from .models import PoleZeroPnParams, eval_pole_zero_psd
from .pll import PllPnParams, pll_contributions_linear


def default_offsets(f_min: float = 1e3, f_max: float = 1e8, points_per_decade: int = 20) -> np.ndarray:
    decades = np.log10(f_max) - np.log10(f_min)
    return np.geomspace(f_min, f_max, int(round(decades * points_per_decade)) + 1)


def pn_psd_frame(params: PoleZeroPnParams, offsets_hz: Sequence[float],
                 carrier_hz: float) -> pd.DataFrame:
    """
    Two-column PSD curve for one carrier.

    Returns:
        DataFrame with columns: offset_hz, psd_dbc_hz
    """
    offsets = np.asarray(offsets_hz, dtype=float)
    return pd.DataFrame({
        "offset_hz": offsets,
        "psd_dbc_hz": np.asarray(eval_pole_zero_psd(params, offsets, carrier_hz)),
    })


def pn_multi_carrier_frame(params: PoleZeroPnParams, offsets_hz: Sequence[float],
                           carriers_hz: Sequence[float]) -> pd.DataFrame:
    """Long-format curves for several carriers (adds a carrier_ghz column)."""
    frames = []
    for carrier in carriers_hz:
        df = pn_psd_frame(params, offsets_hz, carrier)
        df.insert(0, "carrier_ghz", carrier / 1e9)
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def pll_psd_frame(params: PllPnParams, offsets_hz: Sequence[float]) -> pd.DataFrame:
    """Total PLL output PSD plus the per-source contributions (dBc/Hz)."""
    offsets = np.asarray(offsets_hz, dtype=float)
    parts: Dict[str, np.ndarray] = pll_contributions_linear(params, offsets)
    total = sum(parts.values())
    with np.errstate(divide="ignore"):
        data = {"offset_hz": offsets, "psd_dbc_hz": 10.0 * np.log10(total)}
        for name, values in parts.items():
            data[f"{name}_dbc_hz"] = 10.0 * np.log10(values)
    return pd.DataFrame(data)


def save_psd_curve(file_name: str, frame: pd.DataFrame) -> None:
    """Write a PSD curve as CSV."""
    frame.to_csv(file_name, index=False)
    logging.info(f"Saved PSD curve to {file_name}")
