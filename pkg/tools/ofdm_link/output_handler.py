import logging
from typing import Sequence

import pandas as pd

from .bler import BlerPoint

BLER_COLUMNS = ["snr_db", "bler", "ci_halfwidth", "trials", "block_errors", "ci_low", "ci_high",
                "data_re_count", "pilot_overhead", "info_bits"]


def bler_frame(points: Sequence[BlerPoint]) -> pd.DataFrame:
    """
    BLER curve table.

    Returns:
        DataFrame with columns: snr_db, bler, ci_halfwidth, trials, block_errors,
        ci_low, ci_high, data_re_count, pilot_overhead, info_bits
    """
    return pd.DataFrame([{c: getattr(p, c) for c in BLER_COLUMNS} for p in points],
                        columns=BLER_COLUMNS)


def save_bler_curve(file_name: str, points: Sequence[BlerPoint]) -> None:
    bler_frame(points).to_csv(file_name, index=False)
    logging.info(f"Saved BLER curve to {file_name}")
