"""Exit-code tests for the mmwkit command line"""

import os
import shutil
import tempfile
import textwrap
import unittest

import numpy as np

from ...cli import main
from ..config import PRESET_DIR


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.out_dir = os.path.join(self.test_dir, "out")

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def write_config(self, name: str, text: str) -> str:
        path = os.path.join(self.test_dir, name)
        with open(path, "w") as f:
            f.write(textwrap.dedent(text))
        return path

    def test_run_success(self):
        preset = os.path.join(PRESET_DIR, "pn-psd-set-a.yaml")
        code = main(["run", preset, "--out", self.out_dir, "--seed", "9", "--json"])
        self.assertEqual(code, 0)
        for name in ("set_a_psd.csv", "set_a_psd.json", "manifest.json"):
            self.assertTrue(os.path.exists(os.path.join(self.out_dir, name)), name)

    def test_unknown_kind_is_usage_error(self):
        path = self.write_config("bad.yaml", "kind: pn-plot\n")
        self.assertEqual(main(["run", path, "--out", self.out_dir]), 1)

    def test_missing_config_is_io_error(self):
        missing = os.path.join(self.test_dir, "missing.yaml")
        self.assertEqual(main(["run", missing, "--out", self.out_dir]), 3)
        self.assertEqual(main(["validate", missing]), 3)

    def test_rank_deficient_fit_is_numerical_error(self):
        symbols = np.random.default_rng(0).choice([1.0, -1.0, 1j, -1j], 200)
        data = os.path.join(self.test_dir, "unit_envelope.csv")
        with open(data, "w") as f:
            f.write("x_re,x_im,y_re,y_im\n")
            for s in symbols:
                f.write(f"{s.real:.17g},{s.imag:.17g},{s.real:.17g},{s.imag:.17g}\n")
        path = self.write_config("gmp.yaml", """
            kind: pa-gmp-fit
            gmp:
              structure: {nonlinearity_order: 3, memory_depth: 1}
              ridge: 0
              data: unit_envelope.csv
        """)
        self.assertEqual(main(["run", path, "--out", self.out_dir]), 2)

    def test_validate(self):
        preset = os.path.join(PRESET_DIR, "ta-budget-backhaul-3bit.yaml")
        self.assertEqual(main(["validate", preset]), 0)
        path = self.write_config("bad.yaml", """
            include: preset:ta-backhaul-1bit
            kind: ta-budget
            transmitarray: {focal_distance_mm: -1.0}
        """)
        self.assertEqual(main(["validate", path]), 1)

    def test_presets_list(self):
        self.assertEqual(main(["presets", "list"]), 0)

    def test_argument_misuse(self):
        self.assertEqual(main(["run"]), 1)
        self.assertEqual(main(["presets", "show"]), 1)
        self.assertEqual(main([]), 1)


if __name__ == '__main__':
    unittest.main()
