"""Unit tests for the signal core"""

import unittest

import numpy as np

from ...errors import DomainError, ParameterError
from ..sequences import ComplexSequence, RngStream, db_lin_convert, gaussian_complex, to_db
from ..spectrum import welch_psd


class TestComplexSequence(unittest.TestCase):
    def test_rejects_bad_records(self) -> None:
        with self.assertRaises(ParameterError) as ctx:
            ComplexSequence(np.array([1.0, np.nan]), sample_rate_hz=-1.0)
        locators = [loc for loc, _ in ctx.exception.violations]
        self.assertIn("sample_rate_hz", locators)
        self.assertIn("samples", locators)

    def test_samples_are_read_only(self) -> None:
        seq = ComplexSequence(np.ones(4), 10.0)
        with self.assertRaises(ValueError):
            seq.samples[0] = 2.0

    def test_empty_sequence_allowed(self) -> None:
        seq = ComplexSequence(np.zeros(0), 1.0)
        self.assertEqual(len(seq), 0)
        self.assertEqual(seq.mean_power(), 0.0)


class TestGaussianComplex(unittest.TestCase):
    def test_zero_variance_gives_zeros(self) -> None:
        seq = gaussian_complex(RngStream(1), 5, 0.0)
        np.testing.assert_array_equal(seq.samples, np.zeros(5, dtype=complex))

    def test_unit_variance(self) -> None:
        seq = gaussian_complex(RngStream(2024), 10 ** 6, 1.0)
        self.assertAlmostEqual(np.var(seq.samples), 1.0, delta=0.01)
        self.assertAlmostEqual(np.var(seq.samples.real), 0.5, delta=0.01)
        self.assertAlmostEqual(abs(np.mean(seq.samples)), 0.0, delta=0.01)

    def test_reproducible_and_independent_streams(self) -> None:
        a = gaussian_complex(RngStream(7, 3), 1000, 1.0).samples
        b = gaussian_complex(RngStream(7, 3), 1000, 1.0).samples
        c = gaussian_complex(RngStream(7, 4), 1000, 1.0).samples
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))
        corr = abs(np.vdot(a, c)) / np.sqrt(np.vdot(a, a).real * np.vdot(c, c).real)
        self.assertLess(corr, 0.15)

    def test_children_of_neighbouring_streams_do_not_overlap(self) -> None:
        first, second = RngStream(7, 0), RngStream(7, 1)
        draws = {}
        for parent in (first, second):
            for m in range(3):
                key = (parent.stream_id, m)
                draws[key] = parent.child(m).generator.standard_normal(64)
        np.testing.assert_array_equal(draws[(0, 1)],
                                      first.child(1).generator.standard_normal(64))
        self.assertFalse(np.array_equal(draws[(0, 1)], draws[(1, 0)]))
        for m in range(3):
            sibling = RngStream(7, m).generator.standard_normal(64)
            self.assertFalse(np.array_equal(draws[(0, m)], sibling))
        keys = list(draws)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                self.assertFalse(np.array_equal(draws[a], draws[b]))
        self.assertEqual(first.child(2).spawn(5), RngStream(7, 5, (0,)))

    def test_negative_variance(self) -> None:
        with self.assertRaises(ParameterError):
            gaussian_complex(RngStream(1), 5, -1.0)


class TestWelchPsd(unittest.TestCase):
    def test_white_noise_level(self) -> None:
        seq = gaussian_complex(RngStream(11), 2 ** 20, 1.0, sample_rate_hz=1.0)
        est = welch_psd(seq, segment_len=256)
        self.assertEqual(est.freqs_hz.size, 256)
        self.assertTrue(np.all(np.abs(est.psd_db) < 0.5))
        self.assertAlmostEqual(est.resolution_hz, 1.0 / 256)

    def test_tone_location(self) -> None:
        n = np.arange(4096)
        tone = ComplexSequence(np.exp(2j * np.pi * 0.125 * n), 1.0)
        est = welch_psd(tone, segment_len=64)
        self.assertAlmostEqual(est.freqs_hz[np.argmax(est.psd_db)], 0.125)

    def test_zero_signal_floor(self) -> None:
        est = welch_psd(ComplexSequence(np.zeros(128), 1.0), segment_len=32)
        self.assertTrue(np.all(np.isneginf(est.psd_db)))

    def test_parseval(self) -> None:
        seq = gaussian_complex(RngStream(5), 2 ** 18, 3.0, sample_rate_hz=2.0e6)
        est = welch_psd(seq, segment_len=1024)
        self.assertAlmostEqual(est.total_power() / seq.mean_power(), 1.0, delta=0.05)

    def test_segment_validation(self) -> None:
        seq = ComplexSequence(np.ones(16), 1.0)
        with self.assertRaises(ParameterError):
            welch_psd(seq, segment_len=32)
        with self.assertRaises(ParameterError):
            welch_psd(seq, segment_len=4)

    def test_unknown_window_is_a_parameter_error(self) -> None:
        seq = ComplexSequence(np.ones(64), 1.0)
        with self.assertRaises(ParameterError) as ctx:
            welch_psd(seq, segment_len=32, window="not-a-window")
        self.assertEqual([loc for loc, _ in ctx.exception.violations], ["window"])
        est = welch_psd(seq, segment_len=32, window="blackman")
        self.assertEqual(est.freqs_hz.size, 32)


class TestDbConversion(unittest.TestCase):
    def test_known_values(self) -> None:
        self.assertEqual(db_lin_convert(1.0, "to_db"), 0.0)
        self.assertAlmostEqual(db_lin_convert(100.0, "to_db"), 20.0)

    def test_round_trip(self) -> None:
        value = 5.37e-4
        back = db_lin_convert(db_lin_convert(value, "to_db"), "to_linear")
        self.assertLess(abs(back - value) / value, 1e-12)

    def test_domain_error(self) -> None:
        with self.assertRaises(DomainError):
            db_lin_convert(0.0, "to_db")
        with self.assertRaises(DomainError):
            to_db(np.array([1.0, -2.0]))

    def test_unknown_direction(self) -> None:
        with self.assertRaises(ParameterError):
            db_lin_convert(1.0, "sideways")


if __name__ == '__main__':
    unittest.main()
