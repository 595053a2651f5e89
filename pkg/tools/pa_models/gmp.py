"""
Generalized memory polynomial (GMP) evaluation and least-squares fitting.

Basis ordering (fixed, used by coefficient files):
    1. aligned:   x[n-l] |x[n-l]|^(k-1)        k = 1,3,..,K   l = 0..L-1
    2. lagging:   x[n-l] |x[n-l-m]|^(k-1)      k = 3,..,K     l = 0..L-1   m = 1..M_lag
    3. leading:   x[n-l] |x[n-l+m]|^(k-1)      k = 3,..,K     l = 0..L-1   m = 1..M_lead
    4. secondary: x[n-l] |s[n-l]|^(k-1)        k = 3,..,K     l = 0..L-1   (optional)
Samples outside the record are zero.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..errors import NumericalError, ParameterError, raise_if_violations
from ..signal_core import ComplexSequence

DEFAULT_RIDGE_SCALE = 1e-10
MIN_ROWS_PER_TERM = 10


@dataclass(frozen=True)
class GmpStructure:
    """
    GMP basis dimensions.

    Attributes:
        nonlinearity_order: Odd maximum order K
        memory_depth: Taps L
        lag_cross_count: Lagging envelope offsets M_lag
        lead_cross_count: Leading envelope offsets M_lead
        secondary_input: Adds the coupled-signal term group
    """
    nonlinearity_order: int
    memory_depth: int
    lag_cross_count: int = 0
    lead_cross_count: int = 0
    secondary_input: bool = False

    def __post_init__(self) -> None:
        violations = []
        k = self.nonlinearity_order
        if not (int(k) == k and k >= 1 and k % 2 == 1):
            violations.append(("nonlinearity_order", f"must be a positive odd integer, got {k}"))
        if not self.memory_depth >= 1:
            violations.append(("memory_depth", "must be at least 1"))
        for name in ("lag_cross_count", "lead_cross_count"):
            if getattr(self, name) < 0:
                violations.append((name, "must be non-negative"))
        raise_if_violations("GmpStructure", violations)

    @property
    def high_orders(self) -> List[int]:
        return list(range(3, self.nonlinearity_order + 1, 2))

    def terms(self) -> List[Tuple[str, int, int, int]]:
        """(group, k, l, m) in basis order; m is signed (+lag, -lead)."""
        orders = range(1, self.nonlinearity_order + 1, 2)
        taps = range(self.memory_depth)
        out = [("aligned", k, l, 0) for k in orders for l in taps]
        out += [("lagging", k, l, m) for k in self.high_orders for l in taps
                for m in range(1, self.lag_cross_count + 1)]
        out += [("leading", k, l, -m) for k in self.high_orders for l in taps
                for m in range(1, self.lead_cross_count + 1)]
        if self.secondary_input:
            out += [("secondary", k, l, 0) for k in self.high_orders for l in taps]
        return out

    @property
    def basis_size(self) -> int:
        n_high = len(self.high_orders)
        size = (n_high + 1) * self.memory_depth
        size += n_high * self.memory_depth * (self.lag_cross_count + self.lead_cross_count)
        if self.secondary_input:
            size += n_high * self.memory_depth
        return size

    def to_dict(self) -> dict:
        return {
            "nonlinearity_order": self.nonlinearity_order,
            "memory_depth": self.memory_depth,
            "lag_cross_count": self.lag_cross_count,
            "lead_cross_count": self.lead_cross_count,
            "secondary_input": self.secondary_input,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GmpStructure":
        cross = int(data.get("cross_count", 0))
        return cls(
            nonlinearity_order=int(data["nonlinearity_order"]),
            memory_depth=int(data["memory_depth"]),
            lag_cross_count=int(data.get("lag_cross_count", cross)),
            lead_cross_count=int(data.get("lead_cross_count", cross)),
            secondary_input=bool(data.get("secondary_input", False)),
        )


@dataclass(frozen=True)
class GmpModel:
    structure: GmpStructure
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coefficients, dtype=np.complex128).reshape(-1)
        violations = []
        if coeffs.size != self.structure.basis_size:
            violations.append(("coefficients",
                               f"{coeffs.size} values for a basis of {self.structure.basis_size}"))
        if not np.all(np.isfinite(coeffs)):
            violations.append(("coefficients", "must be finite"))
        raise_if_violations("GmpModel", violations)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)


@dataclass
class GmpFitReport:
    nmse_db: float
    condition_estimate: float
    ridge: float
    rank: int
    n_samples: int

    def as_items(self) -> List[Tuple[str, str]]:
        return [
            ("nmse_db", f"{self.nmse_db:.6f}"),
            ("condition_estimate", f"{self.condition_estimate:.6e}"),
            ("ridge", f"{self.ridge:.6e}"),
            ("rank", str(self.rank)),
            ("n_samples", str(self.n_samples)),
        ]


def _delayed(v: np.ndarray, shift: int) -> np.ndarray:
    """v[n - shift] with zeros outside the record (negative shift leads)."""
    out = np.zeros_like(v)
    n = v.size
    if shift >= 0:
        if shift < n:
            out[shift:] = v[:n - shift]
    elif -shift < n:
        out[:n + shift] = v[-shift:]
    return out


def gmp_basis(structure: GmpStructure, x: np.ndarray,
              secondary: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Regression matrix Phi (N x basis_size) in basis order.

    Raises:
        ParameterError: If the secondary input is missing or of the wrong length
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if structure.secondary_input:
        if secondary is None:
            raise ParameterError("Secondary input required by the GMP structure")
        secondary = np.asarray(secondary, dtype=np.complex128).reshape(-1)
        if secondary.size != x.size:
            raise ParameterError(
                f"Secondary input length {secondary.size} differs from input length {x.size}")
    elif secondary is not None and np.asarray(secondary).size != x.size:
        raise ParameterError("Secondary input length differs from input length")

    env = np.abs(x)
    sec_env = np.abs(secondary) if structure.secondary_input else None
    taps = {l: _delayed(x, l) for l in range(structure.memory_depth)}
    columns = []
    for group, k, l, m in structure.terms():
        if group == "secondary":
            envelope = _delayed(sec_env, l)
        else:
            envelope = _delayed(env, l + m)
        columns.append(taps[l] * envelope ** (k - 1))
    return np.stack(columns, axis=1)


def apply_gmp(model: GmpModel, x: ComplexSequence,
              secondary: Optional[ComplexSequence] = None) -> ComplexSequence:
    """
    Evaluate a GMP on an input sequence (zero-padded start-up).

    Raises:
        ParameterError: On secondary-input length mismatch
    """
    sec = None if secondary is None else secondary.samples
    phi = gmp_basis(model.structure, x.samples, sec)
    return ComplexSequence(phi @ model.coefficients, x.sample_rate_hz)


def default_ridge(phi: np.ndarray) -> float:
    gram_trace = float(np.sum(np.abs(phi) ** 2))
    return DEFAULT_RIDGE_SCALE * gram_trace


def fit_gmp(x: ComplexSequence, y: ComplexSequence, structure: GmpStructure,
            ridge: Optional[float] = None,
            secondary: Optional[ComplexSequence] = None) -> Tuple[GmpModel, GmpFitReport]:
    """
    Least-squares GMP identification minimizing |y - Phi c|^2 + ridge |c|^2.

    Args:
        x: PA input
        y: PA output, same length as x
        structure: Basis dimensions
        ridge: Tikhonov weight; None uses 1e-10 * trace(Phi^H Phi), 0 disables it
        secondary: Coupled-signal input when the structure requires it

    Returns:
        Tuple of (fitted model, fit report)

    Raises:
        ParameterError: On length mismatch, too few samples or negative ridge
        NumericalError: If the basis is rank deficient and ridge is 0
    """
    n_terms = structure.basis_size
    violations = []
    if len(x) != len(y):
        violations.append(("y", f"length {len(y)} differs from input length {len(x)}"))
    if len(x) < MIN_ROWS_PER_TERM * n_terms:
        violations.append(("x", f"{len(x)} samples, need at least {MIN_ROWS_PER_TERM * n_terms}"))
    if ridge is not None and not ridge >= 0:
        violations.append(("ridge", "must be non-negative"))
    raise_if_violations("GMP fit", violations)

    phi = gmp_basis(structure, x.samples, None if secondary is None else secondary.samples)
    target = y.samples
    lam = default_ridge(phi) if ridge is None else float(ridge)
    logging.debug(f"GMP fit: {phi.shape[0]} x {n_terms} basis, ridge {lam:.3e}")

    if lam > 0:
        augmented = np.vstack([phi, np.sqrt(lam) * np.eye(n_terms)])
        rhs = np.concatenate([target, np.zeros(n_terms, dtype=np.complex128)])
        coeffs, _, rank, _ = linalg.lstsq(augmented, rhs)
    else:
        coeffs, _, rank, _ = linalg.lstsq(phi, target)
        if rank < n_terms:
            raise NumericalError(
                f"GMP basis is rank deficient (rank {rank} < {n_terms}); use ridge > 0")

    sv = linalg.svdvals(phi)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    residual = target - phi @ coeffs
    energy = float(np.vdot(target, target).real)
    err = float(np.vdot(residual, residual).real)
    if energy == 0:
        nmse_db = float("-inf") if err == 0 else float("inf")
    elif err == 0:
        nmse_db = float("-inf")
    else:
        nmse_db = 10.0 * np.log10(err / energy)
    report = GmpFitReport(float(nmse_db), condition, lam, int(rank), len(x))
    logging.info(f"GMP fit NMSE {report.nmse_db:.2f} dB, condition {condition:.3e}")
    return GmpModel(structure, coeffs), report


def regularized_residual(model: GmpModel, x: ComplexSequence, y: ComplexSequence,
                         ridge: float, secondary: Optional[ComplexSequence] = None) -> float:
    """|y - Phi c|^2 + ridge |c|^2 for a given coefficient vector."""
    phi = gmp_basis(model.structure, x.samples, None if secondary is None else secondary.samples)
    r = y.samples - phi @ model.coefficients
    return float(np.vdot(r, r).real + ridge * np.vdot(model.coefficients,
                                                       model.coefficients).real)
