"""
Far-field patterns: array factor, total gain, directivity, sidelobes and
radiation-mask compliance.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from ..errors import ParameterError, raise_if_violations
from ..signal_core import power_db_floor
from .geometry import AngularGrid, ArrayGeometry, BeamWeights, ElementPattern, unit_vector

QUADRATURE_WARN_DB = 0.1
PRINCIPAL_CUTS = {"xz": 0.0, "yz": 90.0}
ANGLE_TOL_RAD = 1e-9


@dataclass(frozen=True)
class FarFieldPattern:
    """
    Sampled far-field pattern.

    Attributes:
        theta_rad: Polar samples (signed for cuts)
        phi_rad: Azimuth samples
        gain_db: (n_theta, n_phi) values; dBi for gain patterns, dB over one
            element for bare array factors
        kind: 'sphere', 'hemisphere' or 'cut'
        units: 'dBi' or 'dB'
    """
    theta_rad: np.ndarray
    phi_rad: np.ndarray
    gain_db: np.ndarray
    kind: str = "sphere"
    units: str = "dBi"
    peak_gain_db: float = field(init=False)
    peak_direction: Tuple[float, float] = field(init=False)

    def __post_init__(self) -> None:
        grid = AngularGrid(self.theta_rad, self.phi_rad, self.kind)
        gain = np.array(self.gain_db, dtype=float).reshape(grid.shape)
        violations = []
        if np.any(np.isnan(gain)) or np.any(gain == np.inf):
            violations.append(("gain_db", "must not contain NaN or +inf"))
        elif not np.any(np.isfinite(gain)):
            violations.append(("gain_db", "has no finite sample"))
        if self.kind == "sphere" and not _covers(grid.theta_rad, 0.0, np.pi):
            violations.append(("theta_rad", "sphere grid must span 0..pi"))
        if self.kind == "hemisphere" and not _covers(grid.theta_rad, 0.0, np.pi / 2):
            violations.append(("theta_rad", "hemisphere grid must span 0..pi/2"))
        raise_if_violations("FarFieldPattern", violations)
        gain.flags.writeable = False
        object.__setattr__(self, "theta_rad", grid.theta_rad)
        object.__setattr__(self, "phi_rad", grid.phi_rad)
        object.__setattr__(self, "gain_db", gain)
        i, j = np.unravel_index(int(np.argmax(gain)), gain.shape)
        object.__setattr__(self, "peak_gain_db", float(gain[i, j]))
        object.__setattr__(self, "peak_direction",
                           (float(grid.theta_rad[i]), float(grid.phi_rad[j])))

    @property
    def grid(self) -> AngularGrid:
        return AngularGrid(self.theta_rad, self.phi_rad, self.kind)

    @property
    def peak_gain_dbi(self) -> float:
        return self.peak_gain_db

    def intensity(self) -> np.ndarray:
        return 10.0 ** (self.gain_db / 10.0)

    def relative_db(self) -> np.ndarray:
        return self.gain_db - self.peak_gain_db

    def with_offset(self, offset_db: float, units: Optional[str] = None) -> "FarFieldPattern":
        return FarFieldPattern(self.theta_rad, self.phi_rad, self.gain_db + offset_db,
                               self.kind, units or self.units)


def _covers(theta: np.ndarray, lo: float, hi: float) -> bool:
    return abs(theta.min() - lo) < 1e-6 and abs(theta.max() - hi) < 1e-6


def array_factor(geometry: ArrayGeometry, weights: BeamWeights,
                 grid: AngularGrid) -> FarFieldPattern:
    """
    Evaluate 20*log10|sum_m w_m exp(j 2 pi r_m . u)| on a grid.

    Returns:
        Pattern in dB relative to a single unit-weight element
    """
    weights.check_count(geometry)
    magnitude = np.empty(grid.shape)
    directions = grid.directions()
    w = weights.weights
    for i in range(grid.shape[0]):
        phase = 2.0 * np.pi * directions[i] @ geometry.positions.T
        magnitude[i] = np.abs(np.exp(1j * phase) @ w)
    logging.debug(f"Evaluated array factor of {geometry.n_elements} elements "
                  f"on a {grid.shape[0]}x{grid.shape[1]} {grid.kind} grid")
    return FarFieldPattern(grid.theta_rad, grid.phi_rad, power_db_floor(magnitude ** 2),
                           grid.kind, "dB")


def total_pattern(geometry: ArrayGeometry, weights: BeamWeights, element: ElementPattern,
                  grid: AngularGrid) -> FarFieldPattern:
    """Array factor normalized by total weight power plus the element gain (dBi)."""
    af = array_factor(geometry, weights, grid)
    element_db = element.gain_dbi(grid.theta_rad)[:, None]
    gain = af.gain_db - 10.0 * np.log10(weights.power()) + element_db
    return FarFieldPattern(grid.theta_rad, grid.phi_rad, gain, grid.kind, "dBi")


def integrate_intensity(pattern: FarFieldPattern) -> float:
    """
    Integral of the linear intensity over the stored solid angle.

    phi is integrated as a periodic uniform grid, theta by the trapezoid rule
    on U sin(theta).

    Raises:
        ParameterError: For cut patterns
    """
    if pattern.kind == "cut":
        raise ParameterError("Cannot integrate a principal cut over the sphere",
                             [("kind", "need a sphere or hemisphere pattern")])
    u = pattern.intensity()
    d_phi = 2.0 * np.pi / pattern.phi_rad.size
    ring = u.sum(axis=1) * d_phi
    return float(trapezoid(ring * np.sin(pattern.theta_rad), pattern.theta_rad))


def _subsampled(pattern: FarFieldPattern) -> FarFieldPattern:
    idx = np.arange(0, pattern.theta_rad.size, 2)
    if idx[-1] != pattern.theta_rad.size - 1:
        idx = np.append(idx, pattern.theta_rad.size - 1)
    return FarFieldPattern(pattern.theta_rad[idx], pattern.phi_rad[::2],
                           pattern.gain_db[idx][:, ::2], pattern.kind, pattern.units)


@dataclass
class DirectivityReport:
    directivity_dbi: float
    coarse_dbi: float
    quadrature_error_db: float
    warnings: List[str] = field(default_factory=list)


def directivity_report(pattern: FarFieldPattern) -> DirectivityReport:
    """
    Directivity 4*pi*U_max / P_total with a quadrature accuracy estimate.

    The estimate compares against the same integral on a grid of half the
    resolution; differences above 0.1 dB are reported as a warning.
    """
    value = 10.0 * np.log10(4.0 * np.pi * 10.0 ** (pattern.peak_gain_db / 10.0)
                            / integrate_intensity(pattern))
    coarse = _subsampled(pattern)
    coarse_value = 10.0 * np.log10(4.0 * np.pi * pattern.intensity().max()
                                   / integrate_intensity(coarse))
    error = abs(value - coarse_value)
    report = DirectivityReport(float(value), float(coarse_value), float(error))
    if error > QUADRATURE_WARN_DB:
        message = (f"Directivity quadrature error estimate {error:.3f} dB exceeds "
                   f"{QUADRATURE_WARN_DB} dB; refine the angular grid")
        logging.warning(message)
        report.warnings.append(message)
    return report


def directivity(pattern: FarFieldPattern) -> float:
    return directivity_report(pattern).directivity_dbi


def _angular_distance(pattern: FarFieldPattern) -> np.ndarray:
    grid = pattern.grid
    peak = unit_vector(*pattern.peak_direction)
    cosines = np.clip(grid.directions() @ peak, -1.0, 1.0)
    return np.rad2deg(np.arccos(cosines))


def _first_null_radius(distance: np.ndarray, gain: np.ndarray, step_deg: float) -> float:
    """Walk the radial envelope outward from the peak until it stops falling."""
    edges = np.arange(0.0, distance.max() + step_deg, step_deg)
    envelope = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ring = gain[(distance >= lo) & (distance < hi)]
        envelope.append(ring.max() if ring.size else np.nan)
    previous = np.inf
    for k, level in enumerate(envelope):
        if np.isnan(level):
            continue
        if level > previous:
            return float(edges[k])
        previous = level
    return float(edges[-1])


def peak_sidelobe_level(pattern: FarFieldPattern, exclude_deg: Optional[float] = None) -> float:
    """
    Highest lobe outside the main beam, in dB relative to the peak.

    Args:
        pattern: Any pattern
        exclude_deg: Main-beam radius around the peak; by default the main
            lobe extends to its first nulls

    Returns:
        Relative level in dB (-inf if nothing lies outside the main beam)
    """
    distance = _angular_distance(pattern)
    relative = pattern.relative_db()
    if exclude_deg is None:
        step = float(np.rad2deg(np.min(np.diff(np.sort(pattern.theta_rad)))))
        exclude_deg = _first_null_radius(distance, relative, step)
    outside = relative[distance >= exclude_deg]
    logging.debug(f"Sidelobe search beyond {exclude_deg:.2f} deg from the peak")
    return float(outside.max()) if outside.size else float("-inf")


@dataclass(frozen=True)
class RadiationMask:
    """Piecewise-linear limit (dB relative to peak) versus angle from the peak."""
    angles_deg: np.ndarray
    max_db: np.ndarray

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles_deg, dtype=float).reshape(-1)
        limits = np.asarray(self.max_db, dtype=float).reshape(-1)
        violations = []
        if angles.size < 2 or angles.size != limits.size:
            violations.append(("mask", "need at least two (angle, max_db) pairs"))
        elif np.any(np.diff(angles) <= 0):
            violations.append(("angles_deg", "must be strictly increasing"))
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(limits))):
            violations.append(("mask", "values must be finite"))
        raise_if_violations("RadiationMask", violations)
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "max_db", limits)

    @classmethod
    def from_pairs(cls, pairs) -> "RadiationMask":
        pairs = np.asarray(pairs, dtype=float)
        return cls(pairs[:, 0], pairs[:, 1])

    def limit(self, angles_deg: np.ndarray) -> np.ndarray:
        return np.interp(angles_deg, self.angles_deg, self.max_db)


@dataclass
class MaskComplianceReport:
    passed: bool
    worst_margin_db: float
    worst_angle_deg: float
    cut_phi_deg: float
    angles_deg: np.ndarray
    margins_db: np.ndarray


def _signed_cut(pattern: FarFieldPattern, phi_deg: float) -> Tuple[np.ndarray, np.ndarray]:
    """(signed theta in degrees, gain) along the plane at azimuth phi_deg."""
    phi = np.deg2rad(phi_deg)
    wrapped = np.mod(pattern.phi_rad - phi + np.pi, 2.0 * np.pi) - np.pi
    if pattern.kind == "cut":
        if abs(wrapped[0]) < ANGLE_TOL_RAD:
            return np.rad2deg(pattern.theta_rad), pattern.gain_db[:, 0]
        if abs(abs(wrapped[0]) - np.pi) < ANGLE_TOL_RAD:
            return np.rad2deg(-pattern.theta_rad[::-1]), pattern.gain_db[::-1, 0]
        raise ParameterError(f"Cut at phi={phi_deg} deg is not in the pattern grid",
                             [("principal_cut", "pattern holds a different cut")])
    front = np.flatnonzero(np.abs(wrapped) < ANGLE_TOL_RAD)
    back = np.flatnonzero(np.abs(np.abs(wrapped) - np.pi) < ANGLE_TOL_RAD)
    if front.size == 0 or back.size == 0:
        raise ParameterError(f"Cut at phi={phi_deg} deg is not in the pattern grid",
                             [("principal_cut", "phi and phi+180 must both be sampled")])
    theta = np.rad2deg(pattern.theta_rad)
    positive = theta > 0
    angles = np.concatenate([-theta[positive][::-1], theta])
    gain = np.concatenate([pattern.gain_db[positive, back[0]][::-1],
                           pattern.gain_db[:, front[0]]])
    return angles, gain


def mask_compliance(pattern: FarFieldPattern, mask: RadiationMask,
                    principal_cut: Union[str, float] = "xz",
                    min_angle_deg: Optional[float] = None) -> MaskComplianceReport:
    """
    Compare a principal cut, relative to its peak, against a mask.

    Args:
        pattern: Cut, hemisphere or sphere pattern
        mask: Limit versus angle from the cut peak
        principal_cut: 'xz', 'yz' or an azimuth in degrees
        min_angle_deg: Ignore angles closer than this to the peak

    Raises:
        ParameterError: If the cut is not sampled by the pattern or the mask
            does not cover the compared angles
    """
    if isinstance(principal_cut, str):
        if principal_cut not in PRINCIPAL_CUTS:
            raise ParameterError(f"Unknown principal cut {principal_cut!r}",
                                 [("principal_cut", f"must be one of {sorted(PRINCIPAL_CUTS)}")])
        phi_deg = PRINCIPAL_CUTS[principal_cut]
    else:
        phi_deg = float(principal_cut)
    angles, gain = _signed_cut(pattern, phi_deg)
    peak = int(np.argmax(gain))
    offset = np.abs(angles - angles[peak])
    relative = gain - gain[peak]
    keep = offset >= (min_angle_deg or 0.0)
    offset, relative = offset[keep], relative[keep]
    if offset.size == 0:
        raise ParameterError("No cut samples left to compare against the mask")
    if offset.min() < mask.angles_deg[0] - 1e-9 or offset.max() > mask.angles_deg[-1] + 1e-9:
        raise ParameterError(
            f"Mask covers {mask.angles_deg[0]}..{mask.angles_deg[-1]} deg but the cut "
            f"spans {offset.min():.2f}..{offset.max():.2f} deg from its peak",
            [("mask", "does not cover the cut's angle range")])
    margins = mask.limit(offset) - relative
    worst = int(np.argmin(margins))
    report = MaskComplianceReport(
        passed=bool(margins[worst] >= -1e-9),
        worst_margin_db=float(margins[worst]),
        worst_angle_deg=float(offset[worst]),
        cut_phi_deg=phi_deg,
        angles_deg=offset,
        margins_db=margins,
    )
    logging.info(f"Mask check on phi={phi_deg} deg cut: worst margin "
                 f"{report.worst_margin_db:.2f} dB at {report.worst_angle_deg:.1f} deg")
    return report
