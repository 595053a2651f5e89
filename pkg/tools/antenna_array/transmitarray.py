"""
Transmitarray gain budget and aperture pattern.

A rotationally symmetric cos^q focal source sits on axis at the focal
distance below a rows x cols aperture of square unit cells. Each cell
compensates the spherical path phase with a quantized phase state.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..errors import ParameterError, raise_if_violations
from .geometry import AngularGrid, BeamWeights, ElementPattern, quantize_phase
from .pattern import FarFieldPattern

SPEED_OF_LIGHT_MM_GHZ = 299.792458
PHASE_BITS = (1, 2, 3)
CELL_SUBSAMPLES = 8


@dataclass(frozen=True)
class TransmitarrayConfig:
    """
    Transmitarray geometry and feed description.

    Attributes:
        uc_rows, uc_cols: Unit-cell counts along y and x
        uc_size_mm: Square cell pitch
        focal_distance_mm: Feed phase-center distance to the aperture plane
        fs_gain_dbi: Focal source boresight gain
        phase_bits: Phase states per cell, 2^bits
        frequency_ghz: Design frequency
        insertion_loss_db: Cell transmission loss added to the budget
        beam_theta_deg, beam_phi_deg: Collimated beam direction
    """
    uc_rows: int
    uc_cols: int
    uc_size_mm: float
    focal_distance_mm: float
    fs_gain_dbi: float
    phase_bits: int
    frequency_ghz: float = 26.0
    insertion_loss_db: float = 0.0
    beam_theta_deg: float = 0.0
    beam_phi_deg: float = 0.0

    def __post_init__(self) -> None:
        violations = []
        for name in ("uc_rows", "uc_cols"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                violations.append((name, "must be a positive integer"))
        for name in ("uc_size_mm", "focal_distance_mm", "frequency_ghz"):
            if not getattr(self, name) > 0:
                violations.append((name, f"must be positive, got {getattr(self, name)}"))
        if self.phase_bits not in PHASE_BITS:
            violations.append(("phase_bits", f"must be one of {PHASE_BITS}"))
        if self.insertion_loss_db < 0:
            violations.append(("insertion_loss_db", "must be non-negative"))
        if not 0 <= self.beam_theta_deg < 90:
            violations.append(("beam_theta_deg", "must lie in [0, 90)"))
        try:
            ElementPattern.cos_power_for_gain(self.fs_gain_dbi)
        except ParameterError as e:
            violations.append(("fs_gain_dbi", str(e)))
        raise_if_violations("TransmitarrayConfig", violations)

    @classmethod
    def from_dict(cls, data: Dict) -> "TransmitarrayConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"Unknown transmitarray keys: {', '.join(unknown)}",
                                 [(key, "unknown key") for key in unknown])
        return cls(**data)

    def to_dict(self) -> Dict:
        return asdict(self)

    @property
    def wavelength_mm(self) -> float:
        return SPEED_OF_LIGHT_MM_GHZ / self.frequency_ghz

    @property
    def aperture_area_mm2(self) -> float:
        return (self.uc_rows * self.uc_size_mm) * (self.uc_cols * self.uc_size_mm)

    @property
    def feed_q(self) -> float:
        return ElementPattern.cos_power_for_gain(self.fs_gain_dbi).q_exponent

    def cell_centers_mm(self) -> Tuple[np.ndarray, np.ndarray]:
        x = (np.arange(self.uc_cols) - (self.uc_cols - 1) / 2.0) * self.uc_size_mm
        y = (np.arange(self.uc_rows) - (self.uc_rows - 1) / 2.0) * self.uc_size_mm
        xx, yy = np.meshgrid(x, y, indexing="xy")
        return xx.ravel(), yy.ravel()


@dataclass(frozen=True)
class TransmitarrayBudget:
    aperture_directivity_dbi: float
    spillover_efficiency: float
    taper_efficiency: float
    spillover_loss_db: float
    taper_loss_db: float
    quantization_loss_db: float
    insertion_loss_db: float
    net_gain_dbi: float

    @property
    def total_loss_db(self) -> float:
        return (self.spillover_loss_db + self.taper_loss_db + self.quantization_loss_db
                + self.insertion_loss_db)

    def as_items(self) -> List[Tuple[str, float]]:
        items = list(asdict(self).items())
        items.insert(-1, ("total_loss_db", self.total_loss_db))
        return items


def quantization_loss_db(bits: int) -> float:
    """-20*log10(sinc(2^-bits)), sinc(x) = sin(pi x)/(pi x)."""
    if bits < 1:
        raise ParameterError(f"Phase quantization needs at least 1 bit, got {bits}")
    return float(-20.0 * np.log10(np.sinc(2.0 ** -bits)))


def _aperture_samples(config: TransmitarrayConfig, per_cell: int):
    """Sub-cell sample coordinates (mm) and area element."""
    step = config.uc_size_mm / per_cell
    nx, ny = config.uc_cols * per_cell, config.uc_rows * per_cell
    x = (np.arange(nx) - (nx - 1) / 2.0) * step
    y = (np.arange(ny) - (ny - 1) / 2.0) * step
    xx, yy = np.meshgrid(x, y, indexing="xy")
    return xx.ravel(), yy.ravel(), step * step


def _feed_illumination(config: TransmitarrayConfig, x: np.ndarray, y: np.ndarray):
    """Feed power pattern cos^2q toward each point and the solid-angle density F/r^3."""
    f = config.focal_distance_mm
    r = np.sqrt(x ** 2 + y ** 2 + f ** 2)
    power_pattern = (f / r) ** (2.0 * config.feed_q)
    return power_pattern, f / r ** 3, r


def aperture_efficiencies(config: TransmitarrayConfig,
                          per_cell: int = CELL_SUBSAMPLES) -> Tuple[float, float]:
    """
    Spillover and taper efficiencies of the feed on the aperture.

    Returns:
        (spillover, taper), both in (0, 1]
    """
    x, y, d_area = _aperture_samples(config, per_cell)
    power_pattern, solid_angle_density, _ = _feed_illumination(config, x, y)
    q = config.feed_q
    intercepted = np.sum(power_pattern * solid_angle_density) * d_area
    spillover = intercepted / (2.0 * np.pi / (2.0 * q + 1.0))
    field = np.sqrt(power_pattern * solid_angle_density)
    area = config.aperture_area_mm2
    taper = np.sum(field * d_area) ** 2 / (area * np.sum(field ** 2) * d_area)
    return float(min(spillover, 1.0)), float(taper)


def transmitarray_budget(config: TransmitarrayConfig) -> TransmitarrayBudget:
    """
    Gain budget: aperture directivity minus spillover, taper, quantization and
    insertion losses.
    """
    wavelength = config.wavelength_mm
    directivity = 10.0 * np.log10(4.0 * np.pi * config.aperture_area_mm2 / wavelength ** 2)
    spillover, taper = aperture_efficiencies(config)
    spill_db = -10.0 * np.log10(spillover)
    taper_db = -10.0 * np.log10(taper)
    quant_db = quantization_loss_db(config.phase_bits)
    net = directivity - spill_db - taper_db - quant_db - config.insertion_loss_db
    logging.debug(f"Transmitarray {config.uc_rows}x{config.uc_cols} {config.phase_bits}-bit: "
                  f"D={directivity:.2f} dBi, spill={spill_db:.2f}, taper={taper_db:.2f}, "
                  f"quant={quant_db:.2f} dB")
    return TransmitarrayBudget(
        aperture_directivity_dbi=float(directivity),
        spillover_efficiency=spillover,
        taper_efficiency=taper,
        spillover_loss_db=float(spill_db),
        taper_loss_db=float(taper_db),
        quantization_loss_db=quant_db,
        insertion_loss_db=float(config.insertion_loss_db),
        net_gain_dbi=float(net),
    )


def cell_excitations(config: TransmitarrayConfig) -> np.ndarray:
    """Complex field leaving each cell after quantized phase compensation."""
    x, y = config.cell_centers_mm()
    power_pattern, solid_angle_density, r = _feed_illumination(config, x, y)
    k = 2.0 * np.pi / config.wavelength_mm
    theta_b = np.deg2rad(config.beam_theta_deg)
    phi_b = np.deg2rad(config.beam_phi_deg)
    ideal = k * r - k * np.sin(theta_b) * (x * np.cos(phi_b) + y * np.sin(phi_b))
    states = quantize_phase(BeamWeights(np.exp(1j * ideal)), config.phase_bits)
    amplitude = np.sqrt(power_pattern * solid_angle_density)
    return amplitude * states.weights * np.exp(-1j * k * r)


def transmitarray_pattern(config: TransmitarrayConfig, grid: AngularGrid) -> FarFieldPattern:
    """
    Cell-by-cell far field with a cos(theta) cell factor, scaled so the peak
    equals the budget's net gain.
    """
    x, y = config.cell_centers_mm()
    excitation = cell_excitations(config)
    k = 2.0 * np.pi / config.wavelength_mm
    positions = np.stack([x, y], axis=1)
    directions = grid.directions()
    magnitude = np.empty(grid.shape)
    for i in range(grid.shape[0]):
        phase = k * directions[i, :, :2] @ positions.T
        cell_factor = np.clip(directions[i, :, 2], 0.0, None)
        magnitude[i] = np.abs(np.exp(1j * phase) @ excitation) * cell_factor
    with np.errstate(divide="ignore"):
        gain = 20.0 * np.log10(magnitude)
    net = transmitarray_budget(config).net_gain_dbi
    gain = gain - np.max(gain) + net
    return FarFieldPattern(grid.theta_rad, grid.phi_rad, gain, grid.kind, "dBi")
