import logging
from typing import Dict

import numpy as np
import pandas as pd

from ..errors import ConfigIOError, ParameterError
from .pattern import FarFieldPattern, MaskComplianceReport, RadiationMask
from .transmitarray import TransmitarrayBudget


def pattern_frame(pattern: FarFieldPattern) -> pd.DataFrame:
    """
    Long-format pattern table.

    Returns:
        DataFrame with columns: theta_deg, phi_deg, gain_dbi
    """
    theta, phi = np.meshgrid(np.rad2deg(pattern.theta_rad), np.rad2deg(pattern.phi_rad),
                             indexing="ij")
    return pd.DataFrame({
        "theta_deg": theta.ravel(),
        "phi_deg": phi.ravel(),
        "gain_dbi": pattern.gain_db.ravel(),
    })


def save_pattern(file_name: str, pattern: FarFieldPattern) -> None:
    pattern_frame(pattern).to_csv(file_name, index=False)
    logging.info(f"Saved pattern to {file_name}")


def budget_frame(budget: TransmitarrayBudget) -> pd.DataFrame:
    """One row per budget item: quantity, value."""
    return pd.DataFrame(budget.as_items(), columns=["quantity", "value"])


def mask_report_frame(report: MaskComplianceReport) -> pd.DataFrame:
    return pd.DataFrame({"angle_deg": report.angles_deg, "margin_db": report.margins_db})


def mask_from_frame(frame: pd.DataFrame) -> RadiationMask:
    missing = [c for c in ("angle_deg", "max_db") if c not in frame.columns]
    if missing:
        raise ParameterError(f"Mask table lacks columns: {', '.join(missing)}",
                             [(c, "missing column") for c in missing])
    return RadiationMask(frame["angle_deg"].to_numpy(float), frame["max_db"].to_numpy(float))


def load_mask(file_name: str) -> RadiationMask:
    """
    Read a radiation mask CSV with columns angle_deg, max_db.

    Raises:
        ConfigIOError: If the file cannot be read or parsed
        ParameterError: If the mask is not strictly increasing in angle
    """
    try:
        frame = pd.read_csv(file_name, comment="#")
    except (OSError, ValueError) as e:
        raise ConfigIOError(f"Cannot read mask file {file_name}: {str(e)}")
    return mask_from_frame(frame)


def mask_from_dict(data: Dict) -> RadiationMask:
    """Mask from an inline {angles_deg: [...], max_db: [...]} mapping."""
    try:
        return RadiationMask(data["angles_deg"], data["max_db"])
    except KeyError as e:
        raise ParameterError(f"Mask block lacks {str(e)}", [(str(e), "missing key")])
