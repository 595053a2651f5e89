"""
PTRS insertion, common-phase-error estimation and correction on a slot grid.

Grids are (symbols, subcarriers) arrays over the allocated PRBs; received
grids may carry a leading receive-antenna axis.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, EstimationError, ParameterError
from ..signal_core import RngStream
from .config import SUBCARRIERS_PER_PRB, PrbAllocation, PtrsConfig


@dataclass(frozen=True)
class ResourceGrid:
    """
    One slot of resource elements.

    Attributes:
        values: (n_symbols, n_subcarriers) transmitted symbols
        pilot_mask: True where a PTRS sits
        pilot_subcarriers: Allocation-relative PTRS subcarrier indices
        pilot_symbols: Slot symbols carrying PTRS
    """
    values: np.ndarray
    pilot_mask: np.ndarray
    pilot_subcarriers: np.ndarray
    pilot_symbols: np.ndarray

    @property
    def n_symbols(self) -> int:
        return self.values.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.values.shape[1]

    @property
    def pilot_count(self) -> int:
        return int(self.pilot_mask.sum())

    @property
    def data_re_count(self) -> int:
        return int(self.pilot_mask.size - self.pilot_count)

    @property
    def pilot_overhead(self) -> float:
        return self.pilot_count / self.pilot_mask.size

    def data_values(self, grid: Optional[np.ndarray] = None) -> np.ndarray:
        """Data resource elements in symbol-major order (last two axes are the grid)."""
        grid = self.values if grid is None else grid
        return grid[..., ~self.pilot_mask]


def ptrs_positions(allocation: PrbAllocation, cfg: PtrsConfig):
    """Subcarrier 0 of the first PRB of every L-PRB group, on symbols s with s mod K = 0."""
    if not cfg.enabled:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    n_groups = -(-allocation.n_prbs // cfg.freq_density)
    subcarriers = np.arange(n_groups) * cfg.freq_density * SUBCARRIERS_PER_PRB
    symbols = np.arange(0, allocation.n_symbols, cfg.time_density)
    return subcarriers, symbols


def pilot_values(cfg: PtrsConfig, shape) -> np.ndarray:
    """Unit-magnitude QPSK pilots drawn from the pilot seed."""
    states = RngStream(cfg.pilot_seed).generator.integers(0, 4, size=shape)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * states))


def insert_ptrs(allocation: PrbAllocation, cfg: PtrsConfig,
                data: Optional[np.ndarray] = None) -> ResourceGrid:
    """
    Lay out one slot with PTRS and (optionally) data symbols.

    Args:
        allocation: PRB allocation
        cfg: PTRS layout
        data: Symbols for the data REs in symbol-major order; zeros if None

    Raises:
        ConfigurationError: If PTRS are enabled but none fit, or the data
            length does not match the data RE count
    """
    n_sym, n_sc = allocation.n_symbols, allocation.n_subcarriers
    subcarriers, symbols = ptrs_positions(allocation, cfg)
    if cfg.enabled and (subcarriers.size == 0 or symbols.size == 0):
        raise ConfigurationError(f"Allocation of {allocation.n_prbs} PRBs cannot host PTRS")
    mask = np.zeros((n_sym, n_sc), dtype=bool)
    mask[np.ix_(symbols, subcarriers)] = True
    values = np.zeros((n_sym, n_sc), dtype=np.complex128)
    values[mask] = pilot_values(cfg, int(mask.sum()))
    if data is not None:
        data = np.asarray(data, dtype=np.complex128).reshape(-1)
        if data.size != mask.size - mask.sum():
            raise ConfigurationError(
                f"{data.size} data symbols for {mask.size - mask.sum()} data REs",
                [("data", "length must equal the data RE count")])
        values[~mask] = data
    logging.debug(f"Slot of {allocation.n_prbs} PRBs: {subcarriers.size} PTRS subcarriers "
                  f"on {symbols.size} symbols")
    values.flags.writeable = False
    mask.flags.writeable = False
    return ResourceGrid(values, mask, subcarriers, symbols)


def _with_antenna_axis(rx_grid: np.ndarray, h_known: np.ndarray):
    rx = np.asarray(rx_grid, dtype=np.complex128)
    h = np.asarray(h_known, dtype=np.complex128)
    if rx.ndim == 2:
        rx = rx[None]
    if h.ndim == 1:
        h = h[None]
    if h.shape != (rx.shape[0], rx.shape[2]):
        raise ParameterError(f"Channel of shape {h.shape} for received grid {rx.shape}",
                             [("h_known", "must be (n_rx, n_subcarriers)")])
    return rx, h


def estimate_cpe(rx_grid: np.ndarray, tx_grid: ResourceGrid, h_known: np.ndarray) -> np.ndarray:
    """
    Per-symbol CPE estimates from the PTRS.

    Bearing symbols use arg(sum y * conj(H p)) over pilots and receive
    antennas; other symbols interpolate the unwrapped estimates linearly and
    hold the nearest estimate at the slot edges.

    Args:
        rx_grid: ([n_rx,] n_symbols, n_subcarriers) received grid
        tx_grid: Transmitted grid with the pilot layout
        h_known: ([n_rx,] n_subcarriers) channel at every allocated subcarrier

    Raises:
        EstimationError: If the slot carries no PTRS
    """
    if tx_grid.pilot_count == 0:
        raise EstimationError("No PTRS in the slot: CPE cannot be estimated")
    rx, h = _with_antenna_axis(rx_grid, h_known)
    sc = tx_grid.pilot_subcarriers
    bearing = tx_grid.pilot_symbols
    pilots = tx_grid.values[np.ix_(bearing, sc)]
    y = rx[:, bearing][:, :, sc]
    reference = h[:, None, sc] * pilots[None]
    correlation = np.sum(y * np.conj(reference), axis=(0, 2))
    phases = np.unwrap(np.angle(correlation))
    return np.interp(np.arange(tx_grid.n_symbols), bearing, phases)


def correct_cpe(rx_grid: np.ndarray, estimates: np.ndarray) -> np.ndarray:
    """Rotate every RE of symbol s by exp(-j estimates[s])."""
    estimates = np.asarray(estimates, dtype=float)
    rx = np.asarray(rx_grid, dtype=np.complex128)
    if rx.shape[-2] != estimates.size:
        raise ParameterError(f"{estimates.size} estimates for {rx.shape[-2]} symbols")
    return rx * np.exp(-1j * estimates)[:, None]
