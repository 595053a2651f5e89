"""
Array layouts, angular grids, beam weights and element patterns.

Positions are expressed in wavelengths; directions use
u = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ParameterError, raise_if_violations
from ..signal_core import RngStream

ISOTROPIC = "isotropic"
COS_POWER = "cos-power"
TABULATED = "tabulated"
ELEMENT_KINDS = (ISOTROPIC, COS_POWER, TABULATED)

COS_POWER_GAIN_TOL_DB = 0.1


@dataclass(frozen=True)
class Lattice:
    """Periodic layout: cols along x, rows along y, spacings in wavelengths."""
    rows: int
    cols: int
    spacing_x: float
    spacing_y: float

    def positions(self) -> np.ndarray:
        x = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.spacing_x
        y = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.spacing_y
        xx, yy = np.meshgrid(x, y, indexing="xy")
        return np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=1)


@dataclass(frozen=True)
class ArrayGeometry:
    """
    Element positions in wavelengths, with the lattice when periodic.

    Attributes:
        positions: (N, 3) array of element coordinates
        lattice: Periodic descriptor, None for arbitrary layouts
    """
    positions: np.ndarray
    lattice: Optional[Lattice] = None

    def __post_init__(self) -> None:
        pos = np.array(self.positions, dtype=float)
        if pos.ndim == 2 and pos.shape[1] == 2:
            pos = np.hstack([pos, np.zeros((pos.shape[0], 1))])
        violations = []
        if pos.ndim != 2 or pos.shape[1] != 3:
            violations.append(("positions", f"must be (N, 3), got shape {pos.shape}"))
        elif pos.shape[0] < 1:
            violations.append(("positions", "at least one element is required"))
        elif not np.all(np.isfinite(pos)):
            violations.append(("positions", "must be finite"))
        elif self.lattice is not None:
            expected = self.lattice.positions()
            if expected.shape != pos.shape or not np.allclose(expected, pos, atol=1e-9):
                violations.append(("lattice", "does not match the explicit positions"))
        raise_if_violations("ArrayGeometry", violations)
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @classmethod
    def periodic(cls, rows: int, cols: int, spacing_x: float,
                 spacing_y: Optional[float] = None) -> "ArrayGeometry":
        """Centered rows x cols lattice in the z = 0 plane."""
        spacing_y = spacing_x if spacing_y is None else spacing_y
        violations = []
        if rows < 1 or cols < 1:
            violations.append(("rows/cols", "must be at least 1"))
        if not (spacing_x > 0 and spacing_y > 0):
            violations.append(("spacing", "must be positive"))
        raise_if_violations("periodic lattice", violations)
        lattice = Lattice(int(rows), int(cols), float(spacing_x), float(spacing_y))
        return cls(lattice.positions(), lattice)

    @classmethod
    def from_positions(cls, positions) -> "ArrayGeometry":
        return cls(np.asarray(positions, dtype=float))

    @classmethod
    def jittered(cls, base: "ArrayGeometry", max_offset_x: float,
                 rng: RngStream) -> "ArrayGeometry":
        """Aperiodic copy of a layout with uniform x offsets in +/- max_offset_x."""
        pos = base.positions.copy()
        pos[:, 0] += rng.generator.uniform(-max_offset_x, max_offset_x, pos.shape[0])
        return cls(pos)

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]

    @property
    def is_periodic(self) -> bool:
        return self.lattice is not None


@dataclass(frozen=True)
class BeamWeights:
    weights: np.ndarray
    quantization_bits: Optional[int] = None

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise ParameterError("Beam weights must be finite", [("weights", "must be finite")])
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, n: int) -> "BeamWeights":
        return cls(np.ones(n, dtype=np.complex128))

    def check_count(self, geometry: ArrayGeometry) -> None:
        if self.weights.size != geometry.n_elements:
            raise ParameterError(
                f"{self.weights.size} weights for {geometry.n_elements} elements",
                [("weights", "count must equal element count")])

    def power(self) -> float:
        return float(np.sum(np.abs(self.weights) ** 2))


@dataclass(frozen=True)
class AngularGrid:
    """
    Far-field sampling grid.

    Attributes:
        theta_rad: Polar angles; signed values in [-pi/2, pi/2] for cuts
        phi_rad: Azimuths (one value for a cut)
        kind: 'sphere', 'hemisphere' or 'cut'
    """
    theta_rad: np.ndarray
    phi_rad: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        theta = np.atleast_1d(np.asarray(self.theta_rad, dtype=float))
        phi = np.atleast_1d(np.asarray(self.phi_rad, dtype=float))
        violations = []
        if theta.size == 0 or phi.size == 0:
            violations.append(("grid", "must not be empty"))
        if self.kind not in ("sphere", "hemisphere", "cut"):
            violations.append(("kind", f"unknown grid kind {self.kind!r}"))
        if self.kind == "cut" and phi.size != 1:
            violations.append(("phi_rad", "a cut has exactly one azimuth"))
        raise_if_violations("AngularGrid", violations)
        object.__setattr__(self, "theta_rad", theta)
        object.__setattr__(self, "phi_rad", phi)

    @classmethod
    def sphere(cls, step_deg: float = 2.0) -> "AngularGrid":
        n_theta = int(round(180.0 / step_deg)) + 1
        n_phi = int(round(360.0 / step_deg))
        return cls(np.linspace(0.0, np.pi, n_theta),
                   np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False), "sphere")

    @classmethod
    def hemisphere(cls, step_deg: float = 2.0) -> "AngularGrid":
        n_theta = int(round(90.0 / step_deg)) + 1
        n_phi = int(round(360.0 / step_deg))
        return cls(np.linspace(0.0, np.pi / 2, n_theta),
                   np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False), "hemisphere")

    @classmethod
    def cut(cls, phi_deg: float = 0.0, step_deg: float = 0.5,
            span_deg: float = 90.0) -> "AngularGrid":
        n = int(round(2 * span_deg / step_deg)) + 1
        theta = np.deg2rad(np.linspace(-span_deg, span_deg, n))
        return cls(theta, np.array([np.deg2rad(phi_deg)]), "cut")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.theta_rad.size, self.phi_rad.size

    def directions(self) -> np.ndarray:
        """Unit vectors, shape (n_theta, n_phi, 3)."""
        th, ph = np.meshgrid(self.theta_rad, self.phi_rad, indexing="ij")
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def unit_vector(theta_rad: float, phi_rad: float) -> np.ndarray:
    return np.array([np.sin(theta_rad) * np.cos(phi_rad),
                     np.sin(theta_rad) * np.sin(phi_rad),
                     np.cos(theta_rad)])


@dataclass(frozen=True)
class ElementPattern:
    """
    Embedded element pattern.

    Attributes:
        kind: 'isotropic', 'cos-power' (field cos^q over the front hemisphere)
            or 'tabulated' (axisymmetric gain table in theta)
        q_exponent: Field exponent for cos-power
        peak_gain_dbi: Boresight gain
        table_theta_deg / table_gain_dbi: Tabulated pattern samples
    """
    kind: str = ISOTROPIC
    q_exponent: float = 0.0
    peak_gain_dbi: float = 0.0
    table_theta_deg: Optional[Tuple[float, ...]] = None
    table_gain_dbi: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        violations = []
        if self.kind not in ELEMENT_KINDS:
            violations.append(("kind", f"must be one of {ELEMENT_KINDS}"))
        elif self.kind == COS_POWER:
            if not self.q_exponent >= 0:
                violations.append(("q_exponent", "must be non-negative"))
            else:
                expected = cos_power_directivity_dbi(self.q_exponent)
                if abs(expected - self.peak_gain_dbi) > COS_POWER_GAIN_TOL_DB:
                    violations.append(("peak_gain_dbi",
                                       f"{self.peak_gain_dbi} dBi inconsistent with q="
                                       f"{self.q_exponent} ({expected:.3f} dBi)"))
        elif self.kind == TABULATED:
            th = self.table_theta_deg or ()
            g = self.table_gain_dbi or ()
            if len(th) < 2 or len(th) != len(g):
                violations.append(("table", "need matching theta/gain tables of length >= 2"))
            elif np.any(np.diff(th) <= 0):
                violations.append(("table_theta_deg", "must be strictly increasing"))
        raise_if_violations("ElementPattern", violations)

    @classmethod
    def isotropic(cls) -> "ElementPattern":
        return cls(ISOTROPIC, 0.0, 0.0)

    @classmethod
    def cos_power(cls, q: float) -> "ElementPattern":
        return cls(COS_POWER, float(q), cos_power_directivity_dbi(q))

    @classmethod
    def cos_power_for_gain(cls, gain_dbi: float) -> "ElementPattern":
        """cos-power element whose directivity 2(2q+1) equals gain_dbi."""
        q = (10 ** (gain_dbi / 10.0) / 2.0 - 1.0) / 2.0
        if q < 0:
            raise ParameterError(
                f"Gain {gain_dbi} dBi is below the hemispherical minimum (3.01 dBi)",
                [("peak_gain_dbi", "must be at least 10*log10(2)")])
        return cls(COS_POWER, q, float(gain_dbi))

    @classmethod
    def tabulated(cls, theta_deg, gain_dbi) -> "ElementPattern":
        g = tuple(float(v) for v in gain_dbi)
        return cls(TABULATED, 0.0, max(g), tuple(float(t) for t in theta_deg), g)

    @classmethod
    def from_dict(cls, data: dict) -> "ElementPattern":
        kind = data.get("kind", ISOTROPIC)
        if kind == COS_POWER:
            if "q_exponent" in data:
                return cls.cos_power(float(data["q_exponent"]))
            return cls.cos_power_for_gain(float(data["peak_gain_dbi"]))
        if kind == TABULATED:
            return cls.tabulated(data["theta_deg"], data["gain_dbi"])
        return cls(kind)

    def gain_dbi(self, theta_rad: np.ndarray) -> np.ndarray:
        """Gain toward polar angle theta (-inf behind a cos-power element)."""
        theta = np.asarray(theta_rad, dtype=float)
        if self.kind == ISOTROPIC:
            return np.zeros_like(theta)
        if self.kind == TABULATED:
            return np.interp(np.rad2deg(np.abs(theta)), self.table_theta_deg, self.table_gain_dbi)
        c = np.cos(theta)
        with np.errstate(divide="ignore"):
            return np.where(c > 0, self.peak_gain_dbi + 20.0 * self.q_exponent
                            * np.log10(np.maximum(c, 1e-300)), -np.inf)


def cos_power_directivity_dbi(q: float) -> float:
    return float(10.0 * np.log10(2.0 * (2.0 * q + 1.0)))


# Handset element: around 9 dBi
HANDSET_ELEMENT = ElementPattern.cos_power_for_gain(9.0)


def steering_weights(geometry: ArrayGeometry, theta0: float, phi0: float = 0.0) -> BeamWeights:
    """
    Conjugate-phase weights exp(-j 2 pi r . u0) steering toward (theta0, phi0).

    Args:
        geometry: Array layout
        theta0, phi0: Steering direction in radians
    """
    if not 0 <= abs(theta0) <= np.pi:
        raise ParameterError(f"Steering angle {theta0} rad is outside the visible region")
    phase = -2.0 * np.pi * geometry.positions @ unit_vector(theta0, phi0)
    logging.debug(f"Steering {geometry.n_elements} elements to theta={np.rad2deg(theta0):.2f} deg")
    return BeamWeights(np.exp(1j * phase))


def quantize_phase(weights: BeamWeights, bits: int) -> BeamWeights:
    """
    Snap each weight's phase to the nearest of 2^bits uniformly spaced states.

    Magnitudes are kept; a phase exactly between two states goes to the lower one.

    Raises:
        ParameterError: If bits < 1
    """
    if int(bits) != bits or bits < 1:
        raise ParameterError(f"Phase quantization needs at least 1 bit, got {bits}")
    n_states = 2 ** int(bits)
    step = 2.0 * np.pi / n_states
    w = weights.weights
    wrapped = np.mod(np.angle(w), 2.0 * np.pi)
    index = np.mod(np.ceil(wrapped / step - 0.5), n_states)
    return BeamWeights(np.abs(w) * np.exp(1j * index * step), int(bits))


def grating_lobe_limit(spacing_lambda: float) -> float:
    """
    Largest scan angle (degrees) with no grating lobe in visible space.

    Raises:
        ParameterError: If spacing is not positive
    """
    if not spacing_lambda > 0:
        raise ParameterError(f"Spacing must be positive, got {spacing_lambda}")
    if spacing_lambda <= 0.5:
        return 90.0
    if spacing_lambda >= 1.0:
        return 0.0
    return float(np.rad2deg(np.arcsin(1.0 / spacing_lambda - 1.0)))
