import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add project root to path to allow imports without package installation
TOOL_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(TOOL_ROOT))

from qe_bench.core.constants import MISSING_LABEL
from qe_bench.core.dataset import Dataset, load_csv, write_csv
from qe_bench.core.errors import DatasetError
from qe_bench.core.synthetic import CauchyConfig, format_labels, generate_cauchy_dataset, sample_cauchy_features

TOY_CSV = TOOL_ROOT / "data" / "toy_salaries.csv"


class TestDataset(unittest.TestCase):
    def test_lengths_must_match(self):
        with self.assertRaisesRegex(DatasetError, "has 2 rows"):
            Dataset(categorical={"c": ["a", "b"]}, numeric={}, target=[1.0, 2.0, 3.0])

    def test_target_must_be_finite(self):
        with self.assertRaisesRegex(DatasetError, "non-finite"):
            Dataset(categorical={"c": ["a"]}, numeric={}, target=[float("nan")])

    def test_duplicate_names(self):
        with self.assertRaisesRegex(DatasetError, "duplicate column names"):
            Dataset(categorical={"x": ["a"]}, numeric={"x": [1.0]}, target=[1.0])

    def test_columns_are_read_only(self):
        data = Dataset(categorical={"c": ["a", "b"]}, numeric={"n": [1.0, 2.0]}, target=[1.0, 2.0])
        with self.assertRaises(ValueError):
            data.target[0] = 5.0
        with self.assertRaises(ValueError):
            data.numeric["n"][0] = 5.0

    def test_take_and_cardinality(self):
        data = Dataset(categorical={"c": ["a", "b", "a", "c"]}, numeric={}, target=[1.0, 2.0, 3.0, 4.0])
        self.assertEqual(data.cardinality(), {"c": 3})
        subset = data.take([3, 0])
        self.assertEqual(list(subset.categorical["c"]), ["c", "a"])
        self.assertEqual(list(subset.target), [4.0, 1.0])


class TestCsv(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_load_small_file(self):
        path = self.write("s.csv", "country,salary,extra\nUS,100,x\nDE,80,y\nUS,120,z\n")
        data = load_csv(path, ["country"], "salary")
        self.assertEqual(data.n_rows, 3)
        self.assertEqual(data.cardinality(), {"country": 2})
        self.assertEqual(list(data.target), [100.0, 80.0, 120.0])
        self.assertEqual(data.column_names, ["country", "salary"])
        self.assertEqual(data.name, "s")

    def test_empty_cell_is_missing_label(self):
        path = self.write("m.csv", "country,salary\nUS,1\n,2\n")
        data = load_csv(path, ["country"], "salary")
        self.assertEqual(list(data.categorical["country"]), ["US", MISSING_LABEL])

    def test_bad_target_names_row(self):
        path = self.write("b.csv", "country,salary\nUS,1\nDE,abc\n")
        with self.assertRaisesRegex(DatasetError, "row 2: target not numeric"):
            load_csv(path, ["country"], "salary")

    def test_missing_column(self):
        path = self.write("c.csv", "country,salary\nUS,1\n")
        with self.assertRaisesRegex(DatasetError, "missing column: hours"):
            load_csv(path, ["country"], "salary", numeric=["hours"])

    def test_round_trip(self):
        """write_csv(load_csv(f)) reproduces the declared columns cell for cell"""
        text = ("country,employment,hours,salary\n"
                "US,full-time,40,1000\n"
                ",part-time,20,512.50\n"
                "FR,full-time,35.0,8e2\n")
        source = self.write("r.csv", text)
        data = load_csv(source, ["country", "employment"], "salary", numeric=["hours"])
        target = write_csv(data, self.dir / "out.csv")
        self.assertEqual(target.read_text(encoding="utf-8"), text)

    def test_round_trip_drops_undeclared_columns(self):
        source = self.write("u.csv", "note,country,salary\nx,US,1\ny,,2.50\n")
        data = load_csv(source, ["country"], "salary")
        out = write_csv(data, self.dir / "out.csv")
        self.assertEqual(out.read_text(encoding="utf-8"), "country,salary\nUS,1\n,2.50\n")

    def test_subsets_keep_source_cells(self):
        source = self.write("s.csv", "country,salary\nUS,1.50\nDE,2\nFR,3.0\n")
        data = load_csv(source, ["country"], "salary")
        out = write_csv(data.take([2, 0]), self.dir / "out.csv")
        self.assertEqual(out.read_text(encoding="utf-8"), "country,salary\nFR,3.0\nUS,1.50\n")
        changed = write_csv(data.with_target([4.0, 5.0, 6.0]), self.dir / "changed.csv")
        self.assertEqual(changed.read_text(encoding="utf-8"), "country,salary\nUS,4.0\nDE,5.0\nFR,6.0\n")

    def test_missing_label_written_as_empty_cell(self):
        data = Dataset(categorical={"c": ["a", ""]}, numeric={}, target=[1.0, 2.0], target_name="t")
        out = write_csv(data, self.dir / "m.csv")
        self.assertEqual(out.read_text(encoding="utf-8"), "c,t\na,1.0\n,2.0\n")

    def test_bundled_toy_dataset(self):
        data = load_csv(TOY_CSV, ["country", "employment", "education"], "salary", numeric=["hours"])
        self.assertEqual(data.n_rows, 500)
        self.assertIn(MISSING_LABEL, set(data.categorical["country"]))
        self.assertGreater(data.cardinality()["country"], 20)


class TestCauchyDataset(unittest.TestCase):
    def test_shape(self):
        data = generate_cauchy_dataset(CauchyConfig(n_rows=5))
        self.assertEqual(list(data.categorical), ["x1", "x2"])
        self.assertEqual(data.n_rows, 5)
        self.assertEqual(data.target_name, "y")

    def test_invalid_config(self):
        with self.assertRaisesRegex(DatasetError, "n_rows must be positive"):
            CauchyConfig(n_rows=0)
        with self.assertRaises(DatasetError):
            CauchyConfig(n_rows=5, center_low=10.0, center_high=1.0)
        with self.assertRaises(DatasetError):
            CauchyConfig(n_rows=5, scales=(1.0, 0.0))
        with self.assertRaises(DatasetError):
            CauchyConfig(n_rows=5, noise_sigma=-1.0)

    def test_deterministic_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = CauchyConfig(n_rows=200, seed=7, rounding_decimals=1)
            a = write_csv(generate_cauchy_dataset(cfg), Path(tmp) / "a.csv").read_bytes()
            b = write_csv(generate_cauchy_dataset(cfg), Path(tmp) / "b.csv").read_bytes()
            self.assertEqual(a, b)
        other = generate_cauchy_dataset(CauchyConfig(n_rows=200, seed=8, rounding_decimals=1))
        self.assertNotEqual(list(other.categorical["x1"]), list(generate_cauchy_dataset(cfg).categorical["x1"]))

    def test_degenerate_scale_stays_near_centers(self):
        draw = sample_cauchy_features(CauchyConfig(n_rows=500, scales=(1e-12, 1e-12)))
        self.assertTrue(0.0 <= float(np.median(draw.x1)) <= 100.0)
        np.testing.assert_allclose(draw.x1, draw.centers, atol=1e-4)

    def test_cauchy_quartiles(self):
        """x1 - c is standard Cauchy: median 0 and quartiles at +-1"""
        draw = sample_cauchy_features(CauchyConfig(n_rows=100_000, seed=3))
        offsets = draw.x1 - draw.centers
        self.assertLess(abs(float(np.median(offsets))), 0.05)
        self.assertLess(abs(float(np.mean(np.abs(offsets) <= 1.0)) - 0.5), 0.02)

    def test_target_identity_without_noise(self):
        draw = sample_cauchy_features(CauchyConfig(n_rows=300, noise_sigma=0.0, rounding_decimals=0))
        np.testing.assert_array_equal(draw.y, draw.x1 + draw.x2)
        data = generate_cauchy_dataset(CauchyConfig(n_rows=300, noise_sigma=0.0, rounding_decimals=0))
        np.testing.assert_array_equal(data.target, draw.y)

    def test_rounding_collapses_labels(self):
        full = generate_cauchy_dataset(CauchyConfig(n_rows=1000, seed=1))
        rounded = generate_cauchy_dataset(CauchyConfig(n_rows=1000, seed=1, rounding_decimals=0))
        self.assertEqual(full.cardinality()["x1"], 1000)
        self.assertLess(rounded.cardinality()["x1"], 1000)

    def test_label_format(self):
        labels = format_labels(np.array([-0.4, 2.5, 3.14159]), 0)
        self.assertEqual(list(labels), ["0", "2", "3"])
        self.assertEqual(list(format_labels(np.array([1.25]), None)), ["1.25"])


if __name__ == "__main__":
    unittest.main()
