"""
Experiment dispatch: decode a config, run the module it names and write
the artifacts plus a manifest.
"""

import dataclasses
import logging
import time
from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from .. import __version__
from ..antenna_array import (
    AngularGrid,
    ArrayGeometry,
    directivity_report,
    mask_compliance,
    pattern_frame,
    peak_sidelobe_level,
    quantize_phase,
    steering_weights,
    total_pattern,
    transmitarray_budget,
    transmitarray_pattern,
)
from ..antenna_array.output_handler import budget_frame, mask_report_frame
from ..antenna_array.pattern import PRINCIPAL_CUTS
from ..errors import ConfigIOError, ConfigurationError
from ..ofdm_link import bler_frame, run_bler
from ..pa_models import apply_poly3, bussgang_sweep_frame, fit_gmp, format_fit_report
from ..pa_models.output_handler import format_gmp_coefficients
from ..phase_noise import (
    design_pn_filter,
    eval_pole_zero_psd,
    integrated_phase_variance,
    loop_bandwidth_hz,
    pll_psd_frame,
    pn_multi_carrier_frame,
    pn_psd_frame,
)
from ..phase_noise.output_handler import default_offsets
from ..phase_noise.synthesis import synthesize_with_filter
from ..signal_core import ComplexSequence, RngStream, gaussian_array, gaussian_complex, welch_psd
from .config import ExperimentConfig, build_plan
from .output_handler import ArtifactWriter, RunManifest, read_csv_artifact, summary_frame

DSB_OFFSET_DB = 10.0 * np.log10(2.0)
GMP_DATA_COLUMNS = ("x_re", "x_im", "y_re", "y_im")


def _run_pn_psd(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                rng: RngStream) -> Dict[str, object]:
    sweep = plan["sweep"]
    offsets = default_offsets(sweep["f_min_hz"], sweep["f_max_hz"], sweep["points_per_decade"])
    summary: Dict[str, object] = {}
    if "pll" in plan:
        frame = pll_psd_frame(plan["pll"], offsets)
        summary["loop_bandwidth_hz"] = loop_bandwidth_hz(plan["pll"])
    else:
        params = plan["phase_noise"]
        carriers = [c * 1e9 for c in sweep["carriers_ghz"]] or [params.base_carrier_hz]
        if len(carriers) == 1:
            frame = pn_psd_frame(params, offsets, carriers[0])
        else:
            frame = pn_multi_carrier_frame(params, offsets, carriers)
        for carrier in carriers:
            variance = integrated_phase_variance(params, carrier, sweep["f_min_hz"],
                                                 sweep["f_max_hz"])
            summary[f"rms_phase_deg_{carrier / 1e9:g}ghz"] = float(np.rad2deg(np.sqrt(variance)))
    summary["psd_at_f_min_dbc_hz"] = float(frame["psd_dbc_hz"].iloc[0])
    writer.write_frame(f"{config.output}.csv", frame)
    writer.write_frame(f"{config.output}_summary.csv", summary_frame(summary))
    return summary


def _run_pn_synth(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                  rng: RngStream) -> Dict[str, object]:
    params = plan["phase_noise"]
    syn = plan["synthesis"]
    fs = syn["sample_rate_hz"]
    carrier = params.base_carrier_hz if syn["carrier_ghz"] is None else syn["carrier_ghz"] * 1e9
    pn_filter = design_pn_filter(params, carrier, fs, syn["sideband"])
    trajectory = synthesize_with_filter(pn_filter, syn["n_samples"], rng.spawn(0))
    estimate = welch_psd(ComplexSequence(trajectory.phase_rad, fs), syn["segment_len"])

    positive = estimate.freqs_hz > 0
    freqs = estimate.freqs_hz[positive]
    level_offset = DSB_OFFSET_DB if syn["sideband"] == "dsb" else 0.0
    frame = pd.DataFrame({
        "freq_hz": freqs,
        "measured_db_hz": estimate.psd_db[positive],
        "model_dbc_hz": np.asarray(eval_pole_zero_psd(params, freqs, carrier)) - level_offset,
        "filter_dbc_hz": pn_filter.psd_db(freqs),
    })
    writer.write_frame(f"{config.output}.csv", frame)
    if syn["save_trajectory"]:
        n = len(trajectory)
        writer.write_frame(f"{config.output}_trajectory.csv", pd.DataFrame({
            "time_s": np.arange(n) / fs,
            "phase_rad": trajectory.phase_rad,
        }))

    model_variance = integrated_phase_variance(params, carrier, 0.0, fs / 2.0)
    if syn["sideband"] == "dsb":
        model_variance /= 2.0
    summary = {
        "n_samples": len(trajectory),
        "measured_rms_phase_deg": float(np.rad2deg(np.std(trajectory.phase_rad))),
        "model_rms_phase_deg": float(np.rad2deg(np.sqrt(model_variance))),
    }
    writer.write_frame(f"{config.output}_summary.csv", summary_frame(summary))
    return summary


def _run_pa_bussgang(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                     rng: RngStream) -> Dict[str, object]:
    sweep = plan["bussgang"]
    frame = bussgang_sweep_frame(plan["pa"], sweep["input_powers_db"], sweep["formulas"],
                                 n_samples=sweep["n_samples"], rng=rng)
    writer.write_frame(f"{config.output}.csv", frame)
    summary: Dict[str, object] = {"n_points": len(frame)}
    if "as_printed_deviation_db" in frame:
        summary["max_as_printed_deviation_db"] = float(frame["as_printed_deviation_db"].abs().max())
    return summary


def _load_gmp_data(file_name: str, secondary: bool):
    try:
        frame = read_csv_artifact(file_name)
    except (OSError, ValueError) as e:
        raise ConfigIOError(f"Cannot read PA data file {file_name}: {str(e)}")
    columns = GMP_DATA_COLUMNS + (("s_re", "s_im") if secondary else ())
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ConfigIOError(f"PA data file {file_name} lacks columns: {', '.join(missing)}")
    x = ComplexSequence(frame["x_re"].to_numpy(float) + 1j * frame["x_im"].to_numpy(float))
    y = ComplexSequence(frame["y_re"].to_numpy(float) + 1j * frame["y_im"].to_numpy(float))
    s = None
    if secondary:
        s = ComplexSequence(frame["s_re"].to_numpy(float) + 1j * frame["s_im"].to_numpy(float))
    return x, y, s


def _synthetic_gmp_data(pa, synthetic: Dict[str, Any], secondary: bool, rng: RngStream):
    n = int(synthetic["n_samples"])
    x = gaussian_complex(rng.spawn(0), n, 10.0 ** (float(synthetic["input_power_db"]) / 10.0))
    taps = np.asarray(synthetic["memory_taps"], dtype=float)
    y = apply_poly3(pa, ComplexSequence(lfilter(taps, [1.0], x.samples))).samples
    s = None
    if secondary:
        s = gaussian_complex(rng.spawn(2), n, 10.0 ** (float(synthetic["input_power_db"]) / 10.0))
        y = y + float(synthetic.get("coupling", 0.05)) * s.samples * np.abs(x.samples) ** 2
    if synthetic["noise_power_db"] is not None:
        y = y + gaussian_array(rng.spawn(1), (n,), 10.0 ** (float(synthetic["noise_power_db"])
                                                            / 10.0))
    return x, ComplexSequence(y), s


def _run_pa_gmp_fit(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                    rng: RngStream) -> Dict[str, object]:
    gmp = plan["gmp"]
    structure = gmp["structure"]
    if gmp["data"] is not None:
        x, y, s = _load_gmp_data(gmp["data"], structure.secondary_input)
    else:
        x, y, s = _synthetic_gmp_data(plan["pa"], gmp["synthetic"], structure.secondary_input,
                                      rng)
    model, report = fit_gmp(x, y, structure, ridge=gmp["ridge"], secondary=s)
    writer.write_text(f"{config.output}_coefficients.txt", format_gmp_coefficients(model))
    writer.write_text(f"{config.output}_report.txt", format_fit_report(report))
    return {key: value for key, value in report.as_items()}


def _run_array_pattern(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                       rng: RngStream) -> Dict[str, object]:
    geometry = plan["geometry"]
    if plan["jitter_x"]:
        geometry = ArrayGeometry.jittered(geometry, plan["jitter_x"], rng.spawn(0))
    steering = plan["steering"]
    weights = steering_weights(geometry, np.deg2rad(steering["theta_deg"]),
                               np.deg2rad(steering["phi_deg"]))
    if steering["phase_bits"] is not None:
        weights = quantize_phase(weights, int(steering["phase_bits"]))
    grid = plan["grid"]
    pattern = total_pattern(geometry, weights, plan["element"], grid)
    writer.write_frame(f"{config.output}.csv", pattern_frame(pattern))

    theta, phi = pattern.peak_direction
    summary: Dict[str, object] = {
        "n_elements": geometry.n_elements,
        "peak_gain_dbi": pattern.peak_gain_dbi,
        "peak_theta_deg": float(np.rad2deg(theta)),
        "peak_phi_deg": float(np.rad2deg(phi)),
        "peak_sidelobe_db": peak_sidelobe_level(pattern),
    }
    if grid.kind != "cut":
        report = directivity_report(pattern)
        summary["directivity_dbi"] = report.directivity_dbi
        summary["quadrature_error_db"] = report.quadrature_error_db
    writer.write_frame(f"{config.output}_summary.csv", summary_frame(summary))
    return summary


def _run_ta_budget(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                   rng: RngStream) -> Dict[str, object]:
    ta = plan["transmitarray"]
    budget = transmitarray_budget(ta)
    writer.write_frame(f"{config.output}.csv", budget_frame(budget))
    summary: Dict[str, object] = {"net_gain_dbi": budget.net_gain_dbi,
                                  "total_loss_db": budget.total_loss_db}

    mask = plan.get("mask")
    grid = plan.get("grid")
    if grid is None and mask is not None:
        cut = mask["principal_cut"]
        grid = AngularGrid.cut(PRINCIPAL_CUTS[cut] if isinstance(cut, str) else float(cut))
    if grid is None:
        return summary
    pattern = transmitarray_pattern(ta, grid)
    if "grid" in plan:
        writer.write_frame(f"{config.output}_pattern.csv", pattern_frame(pattern))
    if mask is not None:
        report = mask_compliance(pattern, mask["mask"], mask["principal_cut"],
                                 mask["min_angle_deg"])
        writer.write_frame(f"{config.output}_mask.csv", mask_report_frame(report))
        summary.update({
            "mask_passed": report.passed,
            "mask_worst_margin_db": report.worst_margin_db,
            "mask_worst_angle_deg": report.worst_angle_deg,
        })
        logging.info(f"Mask {'passed' if report.passed else 'failed'}, worst margin "
                     f"{report.worst_margin_db:.2f} dB at {report.worst_angle_deg:.1f} deg")
    return summary


def _run_link_bler(config: ExperimentConfig, plan: Dict[str, Any], writer: ArtifactWriter,
                   rng: RngStream) -> Dict[str, object]:
    experiment = plan["link"]
    if experiment.phase_noise is None and experiment.correct_cpe:
        logging.info("No phase-noise block: CPE correction runs on an ideal oscillator")
    points = run_bler(experiment, rng)
    writer.write_frame(f"{config.output}.csv", bler_frame(points))
    return {
        "snr_points": len(points),
        "trials_per_point": experiment.trials,
        "info_bits": points[0].info_bits,
        "pilot_overhead": points[0].pilot_overhead,
    }


RUNNERS: Dict[str, Callable[..., Dict[str, object]]] = {
    "pn-psd": _run_pn_psd,
    "pn-synth": _run_pn_synth,
    "pa-bussgang": _run_pa_bussgang,
    "pa-gmp-fit": _run_pa_gmp_fit,
    "array-pattern": _run_array_pattern,
    "ta-budget": _run_ta_budget,
    "link-bler": _run_link_bler,
}


def _plain(value: object) -> object:
    if isinstance(value, np.generic):
        return value.item()
    return value


def run_experiment(config: ExperimentConfig, out_dir: str = ".", seed: Optional[int] = None,
                   threads: Optional[int] = None,
                   json_mirror: Optional[bool] = None) -> RunManifest:
    """
    Run one experiment and write its artifacts into out_dir.

    Args:
        config: Experiment description
        out_dir: Output directory (created if missing)
        seed: Overrides the config's master seed
        threads: Overrides the config's thread count
        json_mirror: Overrides the config's JSON mirror flag

    Returns:
        RunManifest, also written to out_dir/manifest.json after every artifact

    Raises:
        ParameterError: If the config does not validate
        NumericalError: If a module fails numerically
        OSError: If the output directory is not writable
    """
    overrides = {k: v for k, v in (("seed", seed), ("threads", threads),
                                   ("json_mirror", json_mirror)) if v is not None}
    if overrides:
        config = dataclasses.replace(config, **overrides)
    plan = build_plan(config)
    runner = RUNNERS.get(config.kind)
    if runner is None:
        raise ConfigurationError(f"No runner for kind {config.kind!r}", [("kind", "unsupported")])

    manifest = RunManifest(kind=config.kind, config_hash=config.config_hash(), seed=config.seed,
                           toolkit_version=__version__)
    writer = ArtifactWriter(out_dir, manifest, config.json_mirror)
    logging.info(f"Running {config.kind} experiment {config.output} with seed {config.seed}")
    start = time.perf_counter()
    summary = runner(config, plan, writer, RngStream(config.seed))
    manifest.summary = {key: _plain(value) for key, value in summary.items()}
    manifest.duration_s = time.perf_counter() - start
    writer.write_manifest()
    logging.info(f"Finished {config.kind} in {manifest.duration_s:.2f} s, "
                 f"{len(manifest.files)} file(s)")
    return manifest
