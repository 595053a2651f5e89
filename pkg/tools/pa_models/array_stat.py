"""
Multi-antenna statistical PA model Y = Lambda X + W, W ~ CN(0, C_ww).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from ..errors import ParameterError, raise_if_violations
from ..signal_core import RngStream, gaussian_array
from .polynomial import AS_PRINTED, Poly3Params, bussgang_alpha, bussgang_distortion_power

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


def covariance_violations(name: str, matrix: np.ndarray, size: Optional[int] = None):
    """Shape, Hermitian and PSD checks for a covariance matrix."""
    out = []
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return [(name, f"must be square, got shape {matrix.shape}")]
    if size is not None and matrix.shape[0] != size:
        out.append((name, f"dimension {matrix.shape[0]} does not match {size} branches"))
    if not np.all(np.isfinite(matrix)):
        return out + [(name, "must be finite")]
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
        out.append((name, "must be Hermitian"))
    else:
        eig_min = float(np.min(linalg.eigvalsh(matrix), initial=0.0))
        if eig_min < -PSD_TOL:
            out.append((name, f"must be positive semidefinite (min eigenvalue {eig_min:.3e})"))
    return out


@dataclass(frozen=True)
class ArrayStatModel:
    """
    Attributes:
        alphas: Per-branch Bussgang gains (diagonal of Lambda)
        c_ww: Distortion covariance
        c_xx: Input covariance the model was built for
    """
    alphas: np.ndarray
    c_ww: np.ndarray
    c_xx: np.ndarray

    def __post_init__(self) -> None:
        alphas = np.array(self.alphas, dtype=np.complex128).reshape(-1)
        c_ww = np.array(self.c_ww, dtype=np.complex128)
        c_xx = np.array(self.c_xx, dtype=np.complex128)
        violations = covariance_violations("c_ww", c_ww, alphas.size)
        violations += covariance_violations("c_xx", c_xx, alphas.size)
        raise_if_violations("ArrayStatModel", violations)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "c_ww", c_ww)
        object.__setattr__(self, "c_xx", c_xx)

    @property
    def n_branches(self) -> int:
        return self.alphas.size

    @property
    def lambda_matrix(self) -> np.ndarray:
        return np.diag(self.alphas)


def build_array_stat_model(branch_params: Sequence[Poly3Params], c_xx: np.ndarray,
                           formula: str = AS_PRINTED, n_samples: int = 10 ** 6,
                           rng: Optional[RngStream] = None) -> ArrayStatModel:
    """
    Per-branch Bussgang gains and a diagonal distortion covariance.

    Args:
        branch_params: One cubic PA per branch
        c_xx: Input covariance; branch m sees power c_xx[m, m]
        formula: Distortion power rule, see bussgang_distortion_power
        n_samples: Monte-Carlo draws per branch for 'mc-oracle'
        rng: Base stream; branch m draws from its child m

    Raises:
        ParameterError: If c_xx is not a PSD matrix matching the branch count
    """
    c_xx = np.array(c_xx, dtype=np.complex128)
    raise_if_violations("array model input",
                        covariance_violations("c_xx", c_xx, len(branch_params)))
    rng = rng if rng is not None else RngStream(0)
    powers = np.real(np.diag(c_xx))
    alphas = np.array([bussgang_alpha(p, s2) for p, s2 in zip(branch_params, powers)])
    sigma_w2 = np.array([
        bussgang_distortion_power(p, s2, formula, n_samples=n_samples,
                                  rng=rng.child(m)).value
        for m, (p, s2) in enumerate(zip(branch_params, powers))
    ])
    logging.debug(f"Array model: {len(branch_params)} branches, sigma_w2 {sigma_w2}")
    return ArrayStatModel(alphas, np.diag(sigma_w2).astype(np.complex128), c_xx)


def apply_array_stat(model: ArrayStatModel, x_block: np.ndarray, rng: RngStream) -> np.ndarray:
    """
    Y = Lambda X + W with W ~ CN(0, C_ww) drawn per column.

    Raises:
        ParameterError: If the block row count differs from the branch count
    """
    x_block = np.asarray(x_block, dtype=np.complex128)
    if x_block.ndim != 2 or x_block.shape[0] != model.n_branches:
        raise ParameterError(
            f"Input block must be {model.n_branches} x T, got shape {x_block.shape}")
    eigvals, eigvecs = linalg.eigh(model.c_ww)
    coloring = eigvecs * np.sqrt(np.maximum(eigvals, 0.0))
    white = gaussian_array(rng, x_block.shape, 1.0)
    return model.alphas[:, None] * x_block + coloring @ white
