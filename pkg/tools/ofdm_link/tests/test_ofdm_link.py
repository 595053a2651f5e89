"""Unit tests for the OFDM link tool"""

import os
import shutil
import tempfile
import unittest
from unittest import mock

import numpy as np
import pandas as pd
from scipy.linalg import block_diag, dft

from ...errors import ConfigurationError, EstimationError, ParameterError
from ...phase_noise import SET_A, PoleZeroPnParams, synthesize_phase
from ...signal_core import RngStream, gaussian_array
from .. import bler
from ..bler import run_bler, wilson_interval
from ..config import ChannelRealization, LinkExperiment, OfdmConfig, PrbAllocation, PtrsConfig
from ..modem import ConvolutionalCode, QamModem, UncodedFec
from ..output_handler import BLER_COLUMNS, bler_frame, save_bler_curve
from ..pn_matrix import (
    PnMatrices,
    apply_pn_matrix_model,
    apply_pn_time_domain,
    build_pn_matrix,
    decompose_cpe_ici,
    pn_dft_coeffs,
    pn_impairment_powers,
)
from ..ptrs import correct_cpe, estimate_cpe, insert_ptrs

# Slow oscillator: almost pure CPE within a slot at 7.68 MHz sampling
SLOW_PN = PoleZeroPnParams(psd0_dbc_hz=-28.0, poles_mhz=(1e-4,), zeros_mhz=(0.1,),
                           base_carrier_hz=30e9)


def random_phase(seed: int, n: int, scale: float = 0.3) -> np.ndarray:
    return scale * RngStream(seed).generator.standard_normal(n)


def small_link(**overrides) -> LinkExperiment:
    params = dict(
        ofdm=OfdmConfig(64, 4, 120e3, modulation="QPSK"),
        allocation=PrbAllocation(4),
        ptrs=PtrsConfig(freq_density=1, time_density=1),
        phase_noise=None,
        pn_sides="tx",
        snr_db=(30.0,),
        trials=10,
    )
    params.update(overrides)
    return LinkExperiment(**params)


class TestConfig(unittest.TestCase):
    def test_ofdm_invariants(self) -> None:
        with self.assertRaises(ParameterError) as ctx:
            OfdmConfig(48, 64, -1.0, modulation="8PSK")
        locators = [loc for loc, _ in ctx.exception.violations]
        self.assertEqual(locators, ["n_subcarriers", "cp_len", "subcarrier_spacing_hz",
                                    "modulation"])

    def test_allocation_must_fit(self) -> None:
        with self.assertRaises(ParameterError):
            PrbAllocation(6).fft_bins(OfdmConfig(64, 4, 120e3))
        bins = PrbAllocation(4).fft_bins(OfdmConfig(64, 4, 120e3))
        self.assertEqual(len(set(bins)), 48)

    def test_ptrs_densities(self) -> None:
        with self.assertRaises(ParameterError):
            PtrsConfig(freq_density=3)
        with self.assertRaises(ParameterError):
            PtrsConfig(time_density=8)

    def test_channel_shapes(self) -> None:
        flat = ChannelRealization.flat(8, 2, 2)
        np.testing.assert_array_equal(flat.blocks[3], np.eye(2))
        self.assertEqual(ChannelRealization.flat(8, 2, 1).blocks[0].tolist(), [[1], [1]])
        with self.assertRaises(ParameterError):
            ChannelRealization.from_blocks(np.ones((8, 2)))


class TestPnCoefficients(unittest.TestCase):
    def test_zero_phase_is_identity(self) -> None:
        g = pn_dft_coeffs(np.zeros(16))
        expected = np.zeros(16)
        expected[0] = 1.0
        np.testing.assert_allclose(g, expected, atol=1e-15)
        np.testing.assert_allclose(build_pn_matrix(g), np.eye(16), atol=1e-15)

    def test_constant_phase_is_pure_cpe(self) -> None:
        g = pn_dft_coeffs(np.full(32, 0.7))
        self.assertAlmostEqual(g[0], np.exp(0.7j))
        np.testing.assert_allclose(g[1:], 0.0, atol=1e-14)

    def test_parseval(self) -> None:
        g = pn_dft_coeffs(random_phase(1, 64, 2.0))
        self.assertAlmostEqual(float(np.sum(np.abs(g) ** 2)), 1.0, delta=1e-12)

    def test_length_mismatch(self) -> None:
        with self.assertRaises(ParameterError):
            pn_dft_coeffs(np.zeros(10), 16)

    def test_circulant_layout(self) -> None:
        a, b, c = 1.0, 2.0j, 3.0
        expected = np.array([[a, c, b], [b, a, c], [c, b, a]])
        np.testing.assert_array_equal(build_pn_matrix([a, b, c]), expected)

    def test_diagonals_are_constant(self) -> None:
        g = pn_dft_coeffs(random_phase(2, 16))
        matrix = build_pn_matrix(g)
        for offset in range(-15, 16):
            diagonal = np.diagonal(matrix, offset)
            np.testing.assert_allclose(diagonal, diagonal[0], atol=0)

    def test_dft_diagonalizes(self) -> None:
        for n in (8, 16, 32):
            g = pn_dft_coeffs(random_phase(n, n))
            f = dft(n)
            d = f @ build_pn_matrix(g) @ np.linalg.inv(f)
            np.testing.assert_allclose(d, np.diag(np.fft.fft(g)), atol=1e-12)


class TestPnModels(unittest.TestCase):
    def setUp(self) -> None:
        self.n = 8
        self.h = ChannelRealization.rayleigh(self.n, 2, 2, RngStream(3))
        self.x = gaussian_array(RngStream(4), (2 * self.n,), 1.0)

    def dense(self, g_tx, g_rx, h, x):
        n_rx, n_tx = h.shape
        big_h = block_diag(*h.blocks)
        return (np.kron(build_pn_matrix(g_rx), np.eye(n_rx)) @ big_h
                @ np.kron(build_pn_matrix(g_tx), np.eye(n_tx)) @ x)

    def test_transparent_link(self) -> None:
        ideal = PnMatrices.ideal(self.n)
        flat = ChannelRealization.flat(self.n, 2, 2)
        y = apply_pn_matrix_model(flat, ideal.g_tx, ideal.g_rx, self.x)
        np.testing.assert_allclose(y, self.x, atol=1e-15)

    def test_pure_cpe_both_sides(self) -> None:
        g_tx = pn_dft_coeffs(np.full(self.n, 0.4))
        g_rx = pn_dft_coeffs(np.full(self.n, -1.1))
        y = apply_pn_matrix_model(self.h, g_tx, g_rx, self.x)
        hx = apply_pn_matrix_model(self.h, PnMatrices.ideal(self.n).g_tx,
                                   PnMatrices.ideal(self.n).g_rx, self.x)
        np.testing.assert_allclose(y, np.exp(-0.7j) * hx, atol=1e-12)

    def test_matches_dense_kronecker(self) -> None:
        pn = PnMatrices.from_trajectories(random_phase(5, self.n), random_phase(6, self.n))
        y = apply_pn_matrix_model(self.h, pn.g_tx, pn.g_rx, self.x)
        expected = self.dense(pn.g_tx, pn.g_rx, self.h, self.x)
        self.assertLess(np.max(np.abs(y - expected)), 1e-10)

    def test_noise_requires_stream(self) -> None:
        pn = PnMatrices.ideal(self.n)
        with self.assertRaises(ParameterError):
            apply_pn_matrix_model(self.h, pn.g_tx, pn.g_rx, self.x, noise_variance=0.1)
        y = apply_pn_matrix_model(self.h, pn.g_tx, pn.g_rx, self.x, 0.1, RngStream(9))
        self.assertEqual(y.shape, self.x.shape)

    def test_dimension_mismatch(self) -> None:
        pn = PnMatrices.ideal(self.n)
        with self.assertRaises(ParameterError):
            apply_pn_matrix_model(self.h, pn.g_tx, pn.g_rx, self.x[:-1])
        with self.assertRaises(ParameterError):
            apply_pn_matrix_model(self.h, np.ones(4), pn.g_rx, self.x)

    def test_time_domain_matches_matrix_form(self) -> None:
        n = 16
        h = ChannelRealization.rayleigh(n, 2, 2, RngStream(10))
        x = gaussian_array(RngStream(11), (2 * n,), 1.0)
        theta_tx, theta_rx = random_phase(12, n, 0.5), random_phase(13, n, 0.5)
        pn = PnMatrices.from_trajectories(theta_tx, theta_rx)
        y_matrix = apply_pn_matrix_model(h, pn.g_tx, pn.g_rx, x)
        y_time = apply_pn_time_domain(h, theta_tx, theta_rx, x)
        self.assertLess(np.max(np.abs(y_matrix - y_time)), 1e-10)

    def test_time_domain_without_noise_is_per_subcarrier(self) -> None:
        y = apply_pn_time_domain(self.h, np.zeros(self.n), np.zeros(self.n), self.x)
        expected = np.einsum("krt,kt->kr", self.h.blocks, self.x.reshape(self.n, 2)).ravel()
        np.testing.assert_allclose(y, expected, atol=1e-12)

    def test_opposite_phases_cancel(self) -> None:
        theta = random_phase(14, self.n, 1.0)
        flat = ChannelRealization.flat(self.n, 2, 2)
        y = apply_pn_time_domain(flat, theta, -theta, self.x)
        np.testing.assert_allclose(y, self.x, atol=1e-12)

    def test_decomposition_reconstructs(self) -> None:
        pn = PnMatrices.from_trajectories(random_phase(15, self.n), random_phase(16, self.n))
        cpe, ici = decompose_cpe_ici(self.h, pn.g_tx, pn.g_rx, self.x)
        full = apply_pn_matrix_model(self.h, pn.g_tx, pn.g_rx, self.x)
        self.assertLess(np.max(np.abs(cpe + ici - full)), 1e-12)

    def test_pure_cpe_has_no_ici(self) -> None:
        g_tx = pn_dft_coeffs(np.full(self.n, 0.3))
        g_rx = pn_dft_coeffs(np.full(self.n, 0.9))
        cpe, ici = decompose_cpe_ici(self.h, g_tx, g_rx, self.x)
        np.testing.assert_allclose(ici, 0.0, atol=1e-14)
        full = apply_pn_matrix_model(self.h, g_tx, g_rx, self.x)
        np.testing.assert_allclose(cpe, full, atol=1e-12)

    def test_zero_phase_noise_decomposition(self) -> None:
        ideal = PnMatrices.ideal(self.n)
        cpe, ici = decompose_cpe_ici(self.h, ideal.g_tx, ideal.g_rx, self.x)
        expected = np.einsum("krt,kt->kr", self.h.blocks, self.x.reshape(self.n, 2)).ravel()
        np.testing.assert_allclose(cpe, expected, atol=1e-14)
        np.testing.assert_array_equal(ici, 0.0)

    def test_ici_grows_with_carrier(self) -> None:
        n_fft, cp = 1024, 72
        fs = n_fft * 120e3
        powers = []
        for carrier in (30e9, 60e9, 120e9):
            theta = synthesize_phase(SET_A, carrier, fs, 10 * (n_fft + cp), RngStream(21))
            powers.append(pn_impairment_powers(theta, n_fft, cp))
        self.assertEqual(powers[0].n_symbols, 10)
        self.assertLess(powers[0].ici_power, powers[1].ici_power)
        self.assertLess(powers[1].ici_power, powers[2].ici_power)
        for p in powers:
            self.assertAlmostEqual(p.cpe_power + p.ici_power, 1.0)

    def test_impairment_needs_a_symbol(self) -> None:
        with self.assertRaises(ParameterError):
            pn_impairment_powers(np.zeros(10), 16, 4)


class TestPtrs(unittest.TestCase):
    def test_pilot_counts(self) -> None:
        grid = insert_ptrs(PrbAllocation(100), PtrsConfig(freq_density=4, time_density=1))
        self.assertEqual(grid.pilot_subcarriers.size, 25)
        self.assertEqual(grid.pilot_symbols.tolist(), list(range(7)))
        sparse = insert_ptrs(PrbAllocation(100), PtrsConfig(freq_density=16, time_density=1))
        self.assertEqual(sparse.pilot_subcarriers.size, 7)
        self.assertEqual(sparse.pilot_subcarriers[1], 16 * 12)

    def test_time_density(self) -> None:
        for k, expected in ((2, [0, 2, 4, 6]), (4, [0, 4])):
            grid = insert_ptrs(PrbAllocation(4), PtrsConfig(freq_density=4, time_density=k))
            self.assertEqual(grid.pilot_symbols.tolist(), expected)

    def test_overhead_accounting(self) -> None:
        for l_prb in (1, 2, 4, 8, 16):
            for k in (1, 2, 4):
                grid = insert_ptrs(PrbAllocation(20), PtrsConfig(l_prb, k))
                expected_pilots = (-(-20 // l_prb)) * len(range(0, 7, k))
                self.assertEqual(grid.pilot_count, expected_pilots)
                self.assertEqual(grid.data_re_count, 20 * 12 * 7 - expected_pilots)
                self.assertEqual(grid.data_values().size, grid.data_re_count)

    def test_pilots_unit_magnitude_and_reproducible(self) -> None:
        cfg = PtrsConfig(pilot_seed=5)
        first = insert_ptrs(PrbAllocation(8), cfg)
        second = insert_ptrs(PrbAllocation(8), cfg)
        pilots = first.values[first.pilot_mask]
        np.testing.assert_allclose(np.abs(pilots), 1.0)
        np.testing.assert_array_equal(pilots, second.values[second.pilot_mask])

    def test_data_length_checked(self) -> None:
        with self.assertRaises(ConfigurationError):
            insert_ptrs(PrbAllocation(1), PtrsConfig(), np.ones(5))

    def test_noiseless_pure_cpe_estimate(self) -> None:
        grid = insert_ptrs(PrbAllocation(8), PtrsConfig(2, 1))
        phases = np.array([0.3, -0.2, 1.0, 2.5, 2.9, 1.0, 0.7])
        rx = grid.values * np.exp(1j * phases)[:, None]
        estimates = estimate_cpe(rx, grid, np.ones(grid.n_subcarriers))
        np.testing.assert_allclose(estimates, phases, atol=1e-12)
        np.testing.assert_allclose(correct_cpe(rx, estimates), grid.values, atol=1e-12)

    def test_zero_phase_estimate(self) -> None:
        grid = insert_ptrs(PrbAllocation(4), PtrsConfig(4, 2))
        np.testing.assert_allclose(estimate_cpe(grid.values, grid, np.ones(48)), 0.0, atol=1e-15)

    def test_interpolation_and_edges(self) -> None:
        grid = insert_ptrs(PrbAllocation(4), PtrsConfig(1, 2))
        phases = 0.1 * np.arange(7)
        rx = grid.values * np.exp(1j * phases)[:, None]
        np.testing.assert_allclose(estimate_cpe(rx, grid, np.ones(48)), phases, atol=1e-12)
        grid4 = insert_ptrs(PrbAllocation(4), PtrsConfig(1, 4))
        rx4 = grid4.values * np.exp(1j * phases)[:, None]
        estimates = estimate_cpe(rx4, grid4, np.ones(48))
        self.assertAlmostEqual(estimates[6], 0.4)
        self.assertAlmostEqual(estimates[2], 0.2)

    def test_joint_antenna_estimate(self) -> None:
        grid = insert_ptrs(PrbAllocation(4), PtrsConfig(4, 1))
        h = gaussian_array(RngStream(30), (2, 48), 1.0)
        rx = h[:, None, :] * grid.values[None] * np.exp(0.5j)
        np.testing.assert_allclose(estimate_cpe(rx, grid, h), 0.5, atol=1e-12)

    def test_estimator_variance(self) -> None:
        grid = insert_ptrs(PrbAllocation(100), PtrsConfig(4, 1))
        snr = 100.0
        noise = gaussian_array(RngStream(31), (300,) + grid.values.shape, 1.0 / snr)
        estimates = np.array([estimate_cpe(grid.values + w, grid, np.ones(1200)) for w in noise])
        bound = 1.0 / (2.0 * snr * 25)
        ratio = np.var(estimates) / bound
        self.assertTrue(0.5 < ratio < 2.0)

    def test_no_ptrs(self) -> None:
        grid = insert_ptrs(PrbAllocation(4), PtrsConfig(enabled=False))
        with self.assertRaises(EstimationError):
            estimate_cpe(grid.values, grid, np.ones(48))

    def test_residual_rotation(self) -> None:
        grid = insert_ptrs(PrbAllocation(2), PtrsConfig(1, 1))
        rx = grid.values * np.exp(0.8j)
        corrected = correct_cpe(rx, np.full(7, 0.75))
        np.testing.assert_allclose(corrected, grid.values * np.exp(0.05j), atol=1e-12)
        np.testing.assert_array_equal(correct_cpe(rx, np.zeros(7)), rx)


class TestModem(unittest.TestCase):
    def test_unit_power_constellations(self) -> None:
        for modulation, size in (("QPSK", 4), ("16QAM", 16), ("64QAM", 64)):
            with self.subTest(modulation=modulation):
                points = QamModem(modulation).constellation()
                self.assertEqual(len(set(np.round(points, 9))), size)
                self.assertAlmostEqual(float(np.mean(np.abs(points) ** 2)), 1.0)

    def test_gray_neighbours_differ_in_one_bit(self) -> None:
        modem = QamModem("16QAM")
        points = modem.constellation()
        labels = np.arange(16)
        step = 2.0 / modem.scale
        for a in range(16):
            for b in range(16):
                if abs(abs(points[a] - points[b]) - step) < 1e-9:
                    self.assertEqual(bin(labels[a] ^ labels[b]).count("1"), 1)

    def test_hard_decisions(self) -> None:
        modem = QamModem("64QAM")
        bits = RngStream(40).generator.integers(0, 2, 600)
        symbols = modem.modulate(bits) + 0.02 * (1 + 1j)
        np.testing.assert_array_equal(modem.demodulate(symbols), bits)

    def test_bit_count_checked(self) -> None:
        with self.assertRaises(ParameterError):
            QamModem("16QAM").modulate(np.ones(6, dtype=int))

    def test_convolutional_impulse_response(self) -> None:
        code = ConvolutionalCode()
        coded = code.encode(np.array([1], dtype=np.uint8))
        self.assertEqual(coded.tolist(), [1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1])

    def test_viterbi_corrects_scattered_errors(self) -> None:
        code = ConvolutionalCode()
        info = RngStream(41).generator.integers(0, 2, (3, 200), dtype=np.uint8)
        coded = code.encode(info)
        self.assertEqual(coded.shape, (3, code.coded_length(200)))
        corrupted = coded.copy()
        corrupted[:, [10, 90, 200, 330]] ^= 1
        np.testing.assert_array_equal(code.decode(corrupted, 200), info)

    def test_batched_decode_matches_single_blocks(self) -> None:
        code = ConvolutionalCode()
        gen = RngStream(42).generator
        info = gen.integers(0, 2, (5, 120), dtype=np.uint8)
        coded = code.encode(info)
        flips = gen.random(coded.shape) < 0.08
        noisy = coded ^ flips.astype(np.uint8)
        batched = code.decode(noisy, 120)
        for row in range(5):
            np.testing.assert_array_equal(batched[row], code.decode(noisy[row], 120))
        self.assertEqual(code.decode(noisy[0], 120).shape, (120,))

    def test_decode_length_checked(self) -> None:
        with self.assertRaises(ConfigurationError):
            ConvolutionalCode().decode(np.zeros(30, dtype=np.uint8), 20)

    def test_uncoded(self) -> None:
        fec = UncodedFec()
        self.assertEqual(fec.info_length(100), 100)
        np.testing.assert_array_equal(fec.decode(fec.encode([1, 0, 1]), 3), [1, 0, 1])


class TestBler(unittest.TestCase):
    def setUp(self) -> None:
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self) -> None:
        shutil.rmtree(self.test_dir)

    def test_wilson_interval(self) -> None:
        low, high = wilson_interval(0, 40)
        self.assertEqual(low, 0.0)
        self.assertAlmostEqual(high, 0.0876, places=3)
        low, high = wilson_interval(50, 100)
        self.assertAlmostEqual(low, 0.4038, places=3)
        self.assertAlmostEqual(high, 0.5962, places=3)
        with self.assertRaises(ParameterError):
            wilson_interval(5, 0)

    def test_clean_link(self) -> None:
        (point,) = run_bler(small_link(), RngStream(50))
        self.assertEqual(point.bler, 0.0)
        self.assertEqual(point.data_re_count, 4 * 12 * 7 - 28)
        self.assertEqual(point.info_bits, point.data_re_count - 6)
        self.assertAlmostEqual(point.spectral_efficiency,
                               point.info_bits / point.data_re_count)

    def test_cpe_correction_helps(self) -> None:
        common = dict(phase_noise=SLOW_PN, snr_db=(10.0,), trials=40)
        (enabled,) = run_bler(small_link(correct_cpe=True, **common), RngStream(51))
        (disabled,) = run_bler(small_link(correct_cpe=False, **common), RngStream(51))
        self.assertLess(enabled.bler, disabled.bler)
        self.assertLess(enabled.ci_high, disabled.ci_low)

    def test_reproducible_across_threads(self) -> None:
        base = dict(fec="uncoded", snr_db=(3.0, 6.0), trials=8)
        serial = run_bler(small_link(**base), RngStream(52))
        threaded = run_bler(small_link(threads=3, **base), RngStream(52))
        self.assertEqual([p.block_errors for p in serial], [p.block_errors for p in threaded])

    def test_decode_batching_does_not_change_results(self) -> None:
        link = small_link(phase_noise=SLOW_PN, correct_cpe=False, snr_db=(6.0, 9.0), trials=20)
        whole = run_bler(link, RngStream(55))
        with mock.patch.object(bler, "DECODE_BATCH", 3):
            split = run_bler(link, RngStream(55))
        self.assertEqual([p.block_errors for p in whole], [p.block_errors for p in split])
        self.assertGreater(sum(p.block_errors for p in whole), 0)

    def test_receive_diversity(self) -> None:
        link = small_link(ofdm=OfdmConfig(64, 4, 120e3, n_rx=2, modulation="QPSK"),
                          channel="rayleigh")
        (point,) = run_bler(link, RngStream(53))
        self.assertLessEqual(point.bler, 0.2)

    def test_configuration_errors(self) -> None:
        with self.assertRaises(ConfigurationError):
            run_bler(small_link(block_bits=10_000), RngStream(0))
        with self.assertRaises(ConfigurationError):
            run_bler(small_link(ofdm=OfdmConfig(64, 4, 120e3, n_tx=2)), RngStream(0))
        with self.assertRaises(EstimationError):
            run_bler(small_link(ptrs=PtrsConfig(enabled=False)), RngStream(0))

    def test_bler_csv(self) -> None:
        points = run_bler(small_link(trials=2), RngStream(54))
        path = os.path.join(self.test_dir, "bler.csv")
        save_bler_curve(path, points)
        df = pd.read_csv(path)
        self.assertEqual(list(df.columns), BLER_COLUMNS)
        self.assertEqual(len(bler_frame(points)), 1)


class TestPtrsTimeDensity(unittest.TestCase):
    """BLER of a 64QAM slot under set A phase noise at 30 GHz versus the PTRS symbol spacing."""

    TRIALS = 2000
    SNR_DB = 20.0

    @classmethod
    def curve(cls, n_prbs: int):
        points = {}
        for spacing in (1, 2, 4):
            link = LinkExperiment(
                ofdm=OfdmConfig(2048, 144, 120e3, modulation="64QAM"),
                allocation=PrbAllocation(n_prbs),
                ptrs=PtrsConfig(freq_density=4, time_density=spacing),
                phase_noise=SET_A,
                carrier_hz=30e9,
                pn_sides="both",
                snr_db=(cls.SNR_DB,),
                trials=cls.TRIALS,
                threads=4,
            )
            (points[spacing],) = run_bler(link, RngStream(60))
        return points

    @classmethod
    def setUpClass(cls) -> None:
        cls.wide = cls.curve(100)
        cls.narrow = cls.curve(4)

    def test_bler_grows_with_spacing(self) -> None:
        blers = [self.wide[k].bler for k in (1, 2, 4)]
        self.assertEqual(blers, sorted(blers))
        self.assertLess(self.wide[1].ci_high, self.wide[4].ci_low)

    def test_first_doubling_costs_most(self) -> None:
        first = self.wide[2].bler - self.wide[1].bler
        second = self.wide[4].bler - self.wide[2].bler
        self.assertGreater(first, second)

    def test_narrow_allocation_is_less_sensitive(self) -> None:
        def spread(points):
            blers = [p.bler for p in points.values()]
            return max(blers) - min(blers)

        self.assertLess(spread(self.narrow), spread(self.wide))


if __name__ == '__main__':
    unittest.main()
