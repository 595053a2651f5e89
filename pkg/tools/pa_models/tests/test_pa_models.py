"""Unit tests for the PA models"""

import os
import shutil
import tempfile
import unittest

import numpy as np

from ...errors import ConfigIOError, NumericalError, ParameterError
from ...signal_core import ComplexSequence, RngStream, gaussian_array, gaussian_complex
from ..array_stat import ArrayStatModel, apply_array_stat, build_array_stat_model
from ..gmp import GmpModel, GmpStructure, apply_gmp, fit_gmp, regularized_residual
from ..output_handler import (
    bussgang_sweep_frame,
    format_fit_report,
    load_gmp_coefficients,
    parse_gmp_coefficients,
    save_gmp_coefficients,
)
from ..polynomial import (
    Poly3Params,
    apply_poly3,
    bussgang_alpha,
    bussgang_decompose,
    bussgang_distortion_power,
)


class TestPoly3(unittest.TestCase):
    def test_linear_reduction(self) -> None:
        x = gaussian_complex(RngStream(1), 64, 1.0)
        y = apply_poly3(Poly3Params(0.5 - 0.2j, 0j), x)
        np.testing.assert_array_equal(y.samples, (0.5 - 0.2j) * x.samples)

    def test_direct_substitution(self) -> None:
        y = apply_poly3(Poly3Params(1.0, -0.1), ComplexSequence([1.0 + 0j, 0.0], 1.0))
        self.assertAlmostEqual(y.samples[0], 0.9 + 0j)
        self.assertEqual(y.samples[1], 0j)

    def test_gain_phase_error(self) -> None:
        params = Poly3Params.gain_phase(6.0, 90.0)
        self.assertEqual(params.theta2, 0j)
        self.assertAlmostEqual(abs(params.theta1), 10 ** 0.3)
        self.assertAlmostEqual(np.angle(params.theta1), np.pi / 2)

    def test_rejects_non_finite(self) -> None:
        with self.assertRaises(ParameterError):
            Poly3Params(complex(np.inf, 0), 0j)


class TestBussgang(unittest.TestCase):
    def setUp(self) -> None:
        self.compressive = Poly3Params(1.0, -0.1)
        self.expansive = Poly3Params(1.0, 0.1)

    def test_alpha_values(self) -> None:
        self.assertEqual(bussgang_alpha(Poly3Params(0.7 + 0.1j, 0j), 3.0), 0.7 + 0.1j)
        self.assertAlmostEqual(bussgang_alpha(self.compressive, 1.0), 0.8 + 0j)
        with self.assertRaises(ParameterError):
            bussgang_alpha(self.compressive, 0.0)

    def test_alpha_monte_carlo(self) -> None:
        x = gaussian_array(RngStream(10), (10 ** 6,), 1.0)
        y = self.compressive.theta1 * x + self.compressive.theta2 * x * np.abs(x) ** 2
        estimate = np.mean(y * np.conj(x)) / 1.0
        self.assertLess(abs(estimate - 0.8) / 0.8, 0.01)

    def test_alpha_independent_of_formula(self) -> None:
        alphas = {f: bussgang_decompose(self.expansive, 0.5, f, n_samples=10 ** 4).alpha
                  for f in ("as-printed", "gaussian-moment", "mc-oracle")}
        self.assertEqual(len(set(alphas.values())), 1)

    def test_no_distortion_without_cubic_term(self) -> None:
        linear = Poly3Params(2.0 - 1.0j, 0j)
        for formula in ("as-printed", "gaussian-moment", "mc-oracle"):
            self.assertEqual(
                bussgang_distortion_power(linear, 1.0, formula, n_samples=10 ** 4).value, 0.0)

    def test_as_printed_value(self) -> None:
        self.assertAlmostEqual(bussgang_distortion_power(self.expansive, 1.0).value, 0.1)

    def test_as_printed_growth(self) -> None:
        for theta2 in (0.1, -0.03 + 0.2j):
            for s2 in (0.01, 0.5, 1.0, 10.0):
                params = Poly3Params(1.0, theta2)
                ratio = (bussgang_distortion_power(params, 2 * s2).value
                         / bussgang_distortion_power(params, s2).value)
                self.assertGreaterEqual(ratio, 8.0)
                self.assertLessEqual(ratio, 16.0)

    def test_monte_carlo_oracle_converges(self) -> None:
        mc = bussgang_distortion_power(self.expansive, 1.0, "mc-oracle", n_samples=10 ** 7,
                                       rng=RngStream(99))
        moment = bussgang_distortion_power(self.expansive, 1.0, "gaussian-moment").value
        self.assertAlmostEqual(moment, 0.02)
        self.assertLess(abs(mc.value - moment) / moment, 0.01)
        self.assertLess(mc.ci_halfwidth, 0.01 * moment)
        printed = bussgang_distortion_power(self.expansive, 1.0, "as-printed").value
        self.assertAlmostEqual(printed / mc.value, 5.0, delta=0.15)

    def test_monte_carlo_oracle_agrees_across_seeds(self) -> None:
        values = [bussgang_distortion_power(self.expansive, 1.0, "mc-oracle", n_samples=10 ** 7,
                                            rng=RngStream(seed)).value
                  for seed in (101, 202, 303)]
        self.assertEqual(len(set(values)), 3)
        for a in values:
            for b in values:
                self.assertLess(abs(a - b) / min(a, b), 0.01)

    def test_small_sample_warning(self) -> None:
        result = bussgang_distortion_power(self.expansive, 1.0, "mc-oracle", n_samples=500)
        self.assertEqual(len(result.warnings), 1)

    def test_orthogonality(self) -> None:
        s2 = 0.7
        x = gaussian_array(RngStream(4), (10 ** 6,), s2)
        w = (self.expansive.theta1 * x + self.expansive.theta2 * x * np.abs(x) ** 2
             - bussgang_alpha(self.expansive, s2) * x)
        corr = abs(np.mean(w * np.conj(x))) / np.sqrt(s2 * np.mean(np.abs(w) ** 2))
        self.assertLess(corr, 0.01)

    def test_unknown_formula(self) -> None:
        with self.assertRaises(ParameterError):
            bussgang_distortion_power(self.expansive, 1.0, "folklore")

    def test_sweep_frame(self) -> None:
        df = bussgang_sweep_frame(self.expansive, [-10.0, 0.0], n_samples=10 ** 5)
        self.assertEqual(len(df), 2)
        self.assertIn("sigma_w2_gaussian_moment", df.columns)
        self.assertIn("ci_mc_oracle", df.columns)
        self.assertAlmostEqual(df["alpha_re"].iloc[1], 1.2)

    def test_sweep_points_draw_from_separate_children(self) -> None:
        rng = RngStream(17, 0)
        df = bussgang_sweep_frame(self.expansive, [0.0, 0.0], formulas=["mc-oracle"],
                                  n_samples=10 ** 4, rng=rng)
        self.assertNotEqual(df["sigma_w2_mc_oracle"].iloc[0], df["sigma_w2_mc_oracle"].iloc[1])
        second = bussgang_distortion_power(self.expansive, 1.0, "mc-oracle", n_samples=10 ** 4,
                                           rng=rng.child(1))
        self.assertEqual(df["sigma_w2_mc_oracle"].iloc[1], second.value)


class TestGmp(unittest.TestCase):
    def setUp(self) -> None:
        self.test_dir = tempfile.mkdtemp()
        self.structure = GmpStructure(7, 5, 2, 2)
        self.x = gaussian_complex(RngStream(12), 2 ** 14, 1.0)

    def _random_model(self, structure: GmpStructure, seed: int) -> GmpModel:
        gen = RngStream(seed).generator
        scale = np.array([0.1 ** ((k - 1) // 2) for _, k, _, _ in structure.terms()])
        coeffs = scale * (gen.standard_normal(scale.size) + 1j * gen.standard_normal(scale.size))
        return GmpModel(structure, coeffs)

    def test_basis_size(self) -> None:
        self.assertEqual(self.structure.basis_size, 80)
        self.assertEqual(len(self.structure.terms()), 80)
        self.assertEqual(GmpStructure(7, 5, 2, 2, secondary_input=True).basis_size, 95)
        with self.assertRaises(ParameterError):
            GmpStructure(4, 2)
        with self.assertRaises(ParameterError):
            GmpModel(self.structure, np.zeros(79))

    def test_linear_tap(self) -> None:
        structure = GmpStructure(1, 1)
        y = apply_gmp(GmpModel(structure, [0.3 + 0.4j]), self.x)
        np.testing.assert_allclose(y.samples, (0.3 + 0.4j) * self.x.samples)

    def test_zero_coefficients(self) -> None:
        y = apply_gmp(GmpModel(self.structure, np.zeros(80)), self.x)
        self.assertFalse(np.any(y.samples))

    def test_zero_padded_startup(self) -> None:
        structure = GmpStructure(1, 3)
        x = ComplexSequence([1.0, 2.0, 3.0], 1.0)
        y = apply_gmp(GmpModel(structure, [0.0, 0.0, 1.0]), x)
        np.testing.assert_array_equal(y.samples, [0.0, 0.0, 1.0])

    def test_linear_in_coefficients(self) -> None:
        m1 = self._random_model(self.structure, 1)
        m2 = self._random_model(self.structure, 2)
        summed = GmpModel(self.structure, m1.coefficients + m2.coefficients)
        np.testing.assert_allclose(
            apply_gmp(summed, self.x).samples,
            apply_gmp(m1, self.x).samples + apply_gmp(m2, self.x).samples, rtol=1e-10, atol=1e-10)

    def test_exact_recovery(self) -> None:
        truth = self._random_model(self.structure, 3)
        y = apply_gmp(truth, self.x)
        model, report = fit_gmp(self.x, y, self.structure, ridge=0.0)
        rel = np.linalg.norm(model.coefficients - truth.coefficients) / np.linalg.norm(
            truth.coefficients)
        self.assertLess(rel, 1e-6)
        self.assertLess(report.nmse_db, -120.0)
        self.assertEqual(report.rank, 80)
        self.assertGreater(report.condition_estimate, 1.0)

    def test_identity_device(self) -> None:
        structure = GmpStructure(5, 3, 1, 1)
        model, _ = fit_gmp(self.x, self.x, structure, ridge=0.0)
        self.assertAlmostEqual(abs(model.coefficients[0] - 1.0), 0.0, places=8)
        self.assertLess(np.max(np.abs(model.coefficients[1:])), 1e-8)

    def test_poly3_is_contained(self) -> None:
        y = apply_poly3(Poly3Params(0.9 + 0.05j, -0.08 + 0.01j), self.x)
        _, report = fit_gmp(self.x, y, GmpStructure(3, 2, 1, 1), ridge=0.0)
        self.assertLess(report.nmse_db, -100.0)

    def test_rank_deficient_needs_ridge(self) -> None:
        bpsk = np.where(RngStream(5).generator.standard_normal(4000) > 0, 1.0, -1.0)
        x = ComplexSequence(bpsk, 1.0)
        structure = GmpStructure(3, 2)
        with self.assertRaises(NumericalError) as ctx:
            fit_gmp(x, x, structure, ridge=0.0)
        self.assertIn("ridge", str(ctx.exception))
        _, report = fit_gmp(x, x, structure)
        self.assertGreater(report.ridge, 0.0)

    def test_secondary_input(self) -> None:
        structure = GmpStructure(3, 2, secondary_input=True)
        sec = gaussian_complex(RngStream(13), 2 ** 14, 0.5)
        truth = self._random_model(structure, 4)
        y = apply_gmp(truth, self.x, sec)
        model, _ = fit_gmp(self.x, y, structure, ridge=0.0, secondary=sec)
        np.testing.assert_allclose(model.coefficients, truth.coefficients, atol=1e-9)
        with self.assertRaises(ParameterError):
            apply_gmp(truth, self.x)
        with self.assertRaises(ParameterError):
            apply_gmp(truth, self.x, ComplexSequence(np.ones(10), 1.0))

    def test_too_few_samples(self) -> None:
        short = ComplexSequence(self.x.samples[:500], 1.0)
        with self.assertRaises(ParameterError):
            fit_gmp(short, short, self.structure)

    def test_fit_optimality(self) -> None:
        structure = GmpStructure(3, 2, 1, 1)
        noise = gaussian_complex(RngStream(6), 2 ** 14, 1e-3).samples
        y = ComplexSequence(apply_poly3(Poly3Params(1.0, -0.05), self.x).samples + noise, 1.0)
        ridge = 5.0
        model, _ = fit_gmp(self.x, y, structure, ridge=ridge)
        best = regularized_residual(model, self.x, y, ridge)
        for i in range(structure.basis_size):
            for sign in (1.0, -1.0):
                coeffs = model.coefficients.copy()
                coeffs[i] *= 1.0 + sign * 1e-3
                perturbed = GmpModel(structure, coeffs)
                self.assertGreaterEqual(regularized_residual(perturbed, self.x, y, ridge), best)

    def test_coefficient_file(self) -> None:
        model = self._random_model(self.structure, 8)
        path = os.path.join(self.test_dir, "gmp.txt")
        save_gmp_coefficients(path, model)
        loaded = load_gmp_coefficients(path)
        self.assertEqual(loaded.structure, model.structure)
        np.testing.assert_array_equal(loaded.coefficients, model.coefficients)
        with self.assertRaises(ConfigIOError):
            parse_gmp_coefficients("nonlinearity_order 3\nmemory_depth x\n")
        with self.assertRaises(ConfigIOError):
            load_gmp_coefficients(os.path.join(self.test_dir, "missing.txt"))

    def test_fit_report_text(self) -> None:
        _, report = fit_gmp(self.x, self.x, GmpStructure(1, 2), ridge=0.0)
        text = format_fit_report(report)
        keys = [line.split(" = ")[0] for line in text.splitlines()]
        self.assertEqual(keys[:3], ["nmse_db", "condition_estimate", "ridge"])

    def tearDown(self) -> None:
        shutil.rmtree(self.test_dir)


class TestArrayStat(unittest.TestCase):
    def test_linear_array(self) -> None:
        branches = [Poly3Params(1.0, 0j), Poly3Params(0.5j, 0j)]
        model = build_array_stat_model(branches, np.eye(2))
        np.testing.assert_array_equal(model.alphas, [1.0, 0.5j])
        np.testing.assert_array_equal(model.c_ww, np.zeros((2, 2)))

    def test_single_branch_reduces_to_scalar(self) -> None:
        params = Poly3Params(1.0, 0.1 - 0.02j)
        model = build_array_stat_model([params], np.array([[0.6]]))
        self.assertEqual(model.alphas[0], bussgang_alpha(params, 0.6))
        self.assertEqual(model.c_ww[0, 0].real, bussgang_distortion_power(params, 0.6).value)

    def test_symmetric_branches(self) -> None:
        params = Poly3Params(1.0, -0.07)
        c_xx = np.array([[0.8, 0.3], [0.3, 0.8]])
        exact = build_array_stat_model([params, params], c_xx, formula="gaussian-moment")
        self.assertEqual(exact.c_ww[0, 0], exact.c_ww[1, 1])
        mc = build_array_stat_model([params, params], c_xx, formula="mc-oracle",
                                    n_samples=10 ** 6, rng=RngStream(31))
        d = np.real(np.diag(mc.c_ww))
        self.assertLess(abs(d[0] - d[1]) / d.mean(), 0.05)

    def test_branches_of_neighbouring_calls_draw_distinct_noise(self) -> None:
        params = Poly3Params(1.0, -0.07)
        first = build_array_stat_model([params, params], np.eye(2), formula="mc-oracle",
                                       n_samples=10 ** 4, rng=RngStream(31, 0))
        second = build_array_stat_model([params, params], np.eye(2), formula="mc-oracle",
                                        n_samples=10 ** 4, rng=RngStream(31, 1))
        self.assertNotEqual(first.c_ww[1, 1], second.c_ww[0, 0])
        branch = bussgang_distortion_power(params, 1.0, "mc-oracle", n_samples=10 ** 4,
                                           rng=RngStream(31, 0).child(1))
        self.assertEqual(first.c_ww[1, 1].real, branch.value)

    def test_rejects_non_psd_input(self) -> None:
        with self.assertRaises(ParameterError):
            build_array_stat_model([Poly3Params(1.0)] * 2, np.array([[1.0, 2.0], [2.0, 1.0]]))
        with self.assertRaises(ParameterError):
            build_array_stat_model([Poly3Params(1.0)] * 3, np.eye(2))

    def test_noiseless_application(self) -> None:
        model = ArrayStatModel([0.9, 1.1j], np.zeros((2, 2)), np.eye(2))
        x = gaussian_array(RngStream(2), (2, 100), 1.0)
        y = apply_array_stat(model, x, RngStream(3))
        np.testing.assert_array_equal(y, np.array([[0.9], [1.1j]]) * x)

    def test_white_distortion(self) -> None:
        model = ArrayStatModel([1.0, 1.0], 0.25 * np.eye(2), np.eye(2))
        x = np.zeros((2, 200000), dtype=complex)
        y = apply_array_stat(model, x, RngStream(8))
        np.testing.assert_allclose(np.var(y, axis=1), [0.25, 0.25], rtol=0.02)

    def test_covariance_oracle(self) -> None:
        a = np.array([[1.0, 0.2j, 0.0], [0.1, 0.5, 0.3], [0.0, -0.2, 0.7]])
        c_ww = a @ a.conj().T
        model = ArrayStatModel([0.8, 0.9, 1.0], c_ww, np.eye(3))
        x = gaussian_array(RngStream(1), (3, 10 ** 6), 1.0)
        w = apply_array_stat(model, x, RngStream(7)) - model.alphas[:, None] * x
        sample = w @ w.conj().T / w.shape[1]
        self.assertLess(np.linalg.norm(sample - c_ww) / np.linalg.norm(c_ww), 0.02)

    def test_dimension_mismatch(self) -> None:
        model = ArrayStatModel([1.0, 1.0], np.zeros((2, 2)), np.eye(2))
        with self.assertRaises(ParameterError):
            apply_array_stat(model, np.zeros((3, 10)), RngStream(1))


if __name__ == '__main__':
    unittest.main()
