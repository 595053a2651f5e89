"""
GMP coefficient files, fit reports and Bussgang sweep tables.

Coefficient file layout:

    nonlinearity_order 7
    memory_depth 5
    lag_cross_count 2
    lead_cross_count 2
    secondary_input 0
    coefficients 80
    <re> <im>          (one line per coefficient, basis order)
"""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from ..errors import ConfigIOError
from ..signal_core import RngStream
from .gmp import GmpFitReport, GmpModel, GmpStructure
from .polynomial import (
    AS_PRINTED,
    DISTORTION_FORMULAS,
    MC_ORACLE,
    Poly3Params,
    bussgang_alpha,
    bussgang_distortion_power,
)

HEADER_KEYS = ("nonlinearity_order", "memory_depth", "lag_cross_count", "lead_cross_count",
               "secondary_input")


def format_gmp_coefficients(model: GmpModel) -> str:
    s = model.structure
    lines = [
        f"nonlinearity_order {s.nonlinearity_order}",
        f"memory_depth {s.memory_depth}",
        f"lag_cross_count {s.lag_cross_count}",
        f"lead_cross_count {s.lead_cross_count}",
        f"secondary_input {int(s.secondary_input)}",
        f"coefficients {model.coefficients.size}",
    ]
    lines += [f"{c.real:.17g} {c.imag:.17g}" for c in model.coefficients]
    return "\n".join(lines) + "\n"


def parse_gmp_coefficients(text: str) -> GmpModel:
    """
    Parse a coefficient file body.

    Raises:
        ConfigIOError: If the header or a coefficient line is malformed
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    header = {}
    try:
        for line in lines[:len(HEADER_KEYS) + 1]:
            key, value = line.split()
            header[key] = int(value)
        structure = GmpStructure(
            nonlinearity_order=header["nonlinearity_order"],
            memory_depth=header["memory_depth"],
            lag_cross_count=header["lag_cross_count"],
            lead_cross_count=header["lead_cross_count"],
            secondary_input=bool(header["secondary_input"]),
        )
        body = lines[len(HEADER_KEYS) + 1:]
        if len(body) != header["coefficients"]:
            raise ValueError(f"expected {header['coefficients']} coefficients, found {len(body)}")
        coeffs = [complex(float(re), float(im)) for re, im in (ln.split() for ln in body)]
    except (KeyError, ValueError) as e:
        raise ConfigIOError(f"Malformed GMP coefficient file: {str(e)}")
    return GmpModel(structure, np.array(coeffs))


def save_gmp_coefficients(file_name: str, model: GmpModel) -> None:
    with open(file_name, "w") as f:
        f.write(format_gmp_coefficients(model))
    logging.info(f"Saved GMP coefficients to {file_name}")


def load_gmp_coefficients(file_name: str) -> GmpModel:
    try:
        with open(file_name) as f:
            text = f.read()
    except OSError as e:
        raise ConfigIOError(f"Cannot read GMP coefficient file {file_name}: {str(e)}")
    return parse_gmp_coefficients(text)


def format_fit_report(report: GmpFitReport) -> str:
    return "".join(f"{key} = {value}\n" for key, value in report.as_items())


def bussgang_sweep_frame(params: Poly3Params, input_powers_db: Sequence[float],
                         formulas: Sequence[str] = DISTORTION_FORMULAS,
                         n_samples: int = 10 ** 6, rng: RngStream = None) -> pd.DataFrame:
    """
    Bussgang gain and distortion power versus input power.

    Returns:
        DataFrame with columns: input_power_db, alpha_re, alpha_im, and one
        sigma_w2 column per formula (plus a CI column for the Monte-Carlo mode)
    """
    rng = rng if rng is not None else RngStream(0)
    rows = []
    for i, p_db in enumerate(input_powers_db):
        s2 = 10 ** (p_db / 10.0)
        alpha = bussgang_alpha(params, s2)
        row = {"input_power_db": p_db, "alpha_re": alpha.real, "alpha_im": alpha.imag}
        for formula in formulas:
            result = bussgang_distortion_power(params, s2, formula, n_samples=n_samples,
                                               rng=rng.child(i))
            key = formula.replace("-", "_")
            row[f"sigma_w2_{key}"] = result.value
            if formula == MC_ORACLE:
                row[f"ci_{key}"] = result.ci_halfwidth
        if AS_PRINTED in formulas and MC_ORACLE in formulas:
            printed, oracle = row["sigma_w2_as_printed"], row["sigma_w2_mc_oracle"]
            deviation = 10 * np.log10(printed / oracle) if printed > 0 and oracle > 0 else 0.0
            row["as_printed_deviation_db"] = deviation
        rows.append(row)
    return pd.DataFrame(rows)
