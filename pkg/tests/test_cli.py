import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path

import pandas as pd

# Add project root to path to allow imports without package installation
TOOL_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(TOOL_ROOT))

from qe_bench import __version__
from qe_bench.core.cli import main

TOY_CONFIG = TOOL_ROOT / "config" / "benchmark_toy.json"
GOLDEN_DIR = TOOL_ROOT / "tests" / "golden"


def run_cli(*argv):
    """Run the CLI in-process; returns (exit code, stdout)."""
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main([str(a) for a in argv])
    return code, buffer.getvalue()


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        return path


class TestSynth(CliTestCase):
    def test_deterministic_output(self):
        code_a, _ = run_cli("synth", "--n", 1000, "--seed", 7, "--out", self.dir / "a.csv")
        code_b, _ = run_cli("synth", "--n", 1000, "--seed", 7, "--out", self.dir / "b.csv")
        self.assertEqual((code_a, code_b), (0, 0))
        self.assertEqual((self.dir / "a.csv").read_bytes(), (self.dir / "b.csv").read_bytes())
        self.assertEqual((self.dir / "a.csv").read_text(encoding="utf-8").splitlines()[0], "x1,x2,y")

    def test_rounding_reported(self):
        code, out = run_cli("synth", "--n", 1000, "--round", 0, "--out", self.dir / "r.csv")
        self.assertEqual(code, 0)
        self.assertIn("Wrote 1000 rows", out)
        k = int(out.split("K(x1)=")[1].split(",")[0])
        self.assertLess(k, 1000)

    def test_zero_rows_fails(self):
        with self.assertLogs("qe_bench.core.cli", level="ERROR") as logs:
            code, _ = run_cli("synth", "--n", 0, "--out", self.dir / "z.csv")
        self.assertEqual(code, 1)
        self.assertIn("n_rows must be positive", "\n".join(logs.output))
        self.assertFalse((self.dir / "z.csv").exists())


class TestEncode(CliTestCase):
    TRAIN = "cat,h,y\na,10,1\na,11,2\na,12,9\nb,13,5\n"

    def test_quantile_encode(self):
        train = self.write("train.csv", self.TRAIN)
        out = self.dir / "enc.csv"
        code, _ = run_cli("encode", "--train", train, "--cat", "cat", "--target", "y",
                          "--encoder", "quantile", "--p", 0.5, "--m", 0, "--out", out)
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame["cat"]), [2.0, 2.0, 2.0, 5.0])

    def test_summary_encode_shape(self):
        train = self.write("train.csv", self.TRAIN)
        out = self.dir / "enc.csv"
        code, _ = run_cli("encode", "--train", train, "--cat", "cat", "--num", "h", "--target", "y",
                          "--encoder", "summary", "--quantiles", "0.25,0.5,0.75", "--m", 0, "--out", out)
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["cat__q0.25", "cat__q0.5", "cat__q0.75", "h", "y"])
        self.assertEqual(list(frame.iloc[0][:3]), [1.5, 2.0, 5.5])

    def test_unseen_categories_warn(self):
        train = self.write("train.csv", self.TRAIN)
        apply = self.write("apply.csv", "cat,h,y\na,1,0\nz,1,0\nq,1,0\n")
        out = self.dir / "enc.csv"
        code, stdout = run_cli("encode", "--train", train, "--apply", apply, "--cat", "cat", "--target", "y",
                               "--p", 0.5, "--m", 0, "--out", out)
        self.assertEqual(code, 0)
        self.assertIn("Warnings: 2 unseen", stdout)
        self.assertEqual(list(pd.read_csv(out)["cat"]), [2.0, 3.5, 3.5])

    def test_dump_and_load_encoder(self):
        train = self.write("train.csv", self.TRAIN)
        dumped = self.dir / "encoder.json"
        first = self.dir / "first.csv"
        second = self.dir / "second.csv"
        run_cli("encode", "--train", train, "--cat", "cat", "--target", "y", "--encoder", "m_estimate_mean",
                "--m", 2, "--out", first, "--dump-encoder", dumped)
        self.assertEqual(json.loads(dumped.read_text(encoding="utf-8"))["kind"], "m_estimate_mean")
        code, _ = run_cli("encode", "--load-encoder", dumped, "--apply", train, "--cat", "cat",
                          "--target", "y", "--out", second)
        self.assertEqual(code, 0)
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def write_document(self, encoders):
        self.write("train.csv", self.TRAIN)
        document = {
            "dataset": {"csv": "train.csv", "categorical": ["cat"], "numeric": ["h"], "target": "y"},
            "encoders": encoders,
        }
        return self.write("run.json", json.dumps(document))

    def test_config_supplies_schema_and_encoder(self):
        config = self.write_document({"median": {"kind": "quantile", "m_values": [0], "p_values": [0.5]}})
        out = self.dir / "enc.csv"
        code, _ = run_cli("encode", "--config", config, "--out", out)
        self.assertEqual(code, 0)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["cat", "h", "y"])
        self.assertEqual(list(frame["cat"]), [2.0, 2.0, 2.0, 5.0])

    def test_config_summary_levels(self):
        config = self.write_document({"summary": {"kind": "summary", "m_values": [0], "p_values": [[0.25, 0.5, 0.75]]}})
        out = self.dir / "enc.csv"
        self.assertEqual(run_cli("encode", "--config", config, "--out", out)[0], 0)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["cat__q0.25", "cat__q0.5", "cat__q0.75", "h", "y"])
        self.assertEqual(list(frame.iloc[0][:3]), [1.5, 2.0, 5.5])

    def test_flags_override_config(self):
        config = self.write_document({"median": {"kind": "quantile", "m_values": [0], "p_values": [0.5]}})
        out = self.dir / "enc.csv"
        code, _ = run_cli("encode", "--config", config, "--encoder", "m_estimate_mean", "--m", 0, "--out", out)
        self.assertEqual(code, 0)
        self.assertEqual(list(pd.read_csv(out)["cat"]), [4.0, 4.0, 4.0, 5.0])

    def test_config_with_unknown_kind_fails(self):
        config = self.write_document({"bad": {"kind": "frequency"}})
        with self.assertLogs("qe_bench.core.cli", level="ERROR") as logs:
            code, _ = run_cli("encode", "--config", config, "--out", self.dir / "enc.csv")
        self.assertEqual(code, 1)
        self.assertIn("invalid configuration", "\n".join(logs.output))
        self.assertFalse((self.dir / "enc.csv").exists())

    def test_schema_mismatch_names_column(self):
        train = self.write("train.csv", self.TRAIN)
        with self.assertLogs("qe_bench.core.cli", level="ERROR") as logs:
            code, _ = run_cli("encode", "--train", train, "--cat", "country", "--target", "y",
                              "--out", self.dir / "x.csv")
        self.assertEqual(code, 1)
        self.assertIn("missing column: country", "\n".join(logs.output))


class TestBenchmarkCommand(CliTestCase):
    def test_synthetic_benchmark(self):
        out = self.dir / "cauchy.json"
        code, stdout = run_cli("benchmark", "--n", 400, "--round", 0, "--encoder", "quantile,target",
                               "--metric", "mae", "--folds", 4, "--repeats", 3, "--out", out)
        self.assertEqual(code, 0)
        self.assertIn("p-value=", stdout)
        report = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(report["version"], __version__)
        self.assertEqual(report["config"]["dataset"]["synthetic"]["n_rows"], 400)
        self.assertEqual(len(report["reports"]["mae"]["encoders"]["quantile"]["configs"]), 12)
        row = report["comparisons"][0]
        self.assertTrue(0.0 <= row["p_value"] <= 1.0)
        self.assertTrue(0.0 <= row["p_q"] <= 1.0)
        self.assertTrue((self.dir / "cauchy.mae.csv").exists())

    def test_same_seed_same_report(self):
        args = ("benchmark", "--n", 200, "--round", 0, "--encoder", "quantile,target", "--repeats", 1, "--seed", 3)
        run_cli(*args, "--out", self.dir / "a.json")
        run_cli(*args, "--out", self.dir / "b.json")
        self.assertEqual((self.dir / "a.json").read_bytes(), (self.dir / "b.json").read_bytes())

    def test_unknown_reference_aborts(self):
        with self.assertLogs("qe_bench.core.cli", level="ERROR") as logs:
            code, _ = run_cli("benchmark", "--n", 100, "--encoder", "quantile,target", "--reference", "ordinal",
                              "--out", self.dir / "r.json")
        self.assertEqual(code, 1)
        self.assertIn("unknown reference encoder", "\n".join(logs.output))
        self.assertFalse((self.dir / "r.json").exists())

    def test_toy_golden_run_is_byte_stable(self):
        """The bundled toy configuration yields identical report bytes on every run"""
        first = self.dir / "first" / "toy.json"
        second = self.dir / "second" / "toy.json"
        self.assertEqual(run_cli("benchmark", "--config", TOY_CONFIG, "--out", first)[0], 0)
        self.assertEqual(run_cli("benchmark", "--config", TOY_CONFIG, "--out", second)[0], 0)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        for metric in ("mae", "mse"):
            self.assertEqual((first.parent / f"toy.{metric}.csv").read_bytes(),
                             (second.parent / f"toy.{metric}.csv").read_bytes())
        report = json.loads(first.read_text(encoding="utf-8"))
        self.assertEqual(report["failures"], 0)
        self.assertEqual(sorted(report["reports"]), ["mae", "mse"])
        self.assertEqual(report["config"]["reference"], "target")

    def test_toy_report_matches_golden(self):
        """The toy report equals the recorded golden bytes; QEB_UPDATE_GOLDEN=1 records them"""
        out = self.dir / "toy_salaries.json"
        self.assertEqual(run_cli("benchmark", "--config", TOY_CONFIG, "--out", out)[0], 0)
        names = ["toy_salaries.json", "toy_salaries.mae.csv", "toy_salaries.mse.csv"]
        if os.environ.get("QEB_UPDATE_GOLDEN") == "1":
            GOLDEN_DIR.mkdir(exist_ok=True)
            for name in names:
                shutil.copyfile(self.dir / name, GOLDEN_DIR / name)
        if not (GOLDEN_DIR / names[0]).exists():
            self.skipTest(f"no golden report in {GOLDEN_DIR}; record it with QEB_UPDATE_GOLDEN=1")
        for name in names:
            self.assertEqual((self.dir / name).read_bytes(), (GOLDEN_DIR / name).read_bytes(), name)

    def test_report_does_not_embed_data_location(self):
        out = self.dir / "toy.json"
        self.assertEqual(run_cli("benchmark", "--config", TOY_CONFIG, "--repeats", 1, "--encoder", "quantile,target",
                                 "--out", out)[0], 0)
        text = out.read_text(encoding="utf-8")
        self.assertEqual(json.loads(text)["config"]["dataset"]["csv"], "toy_salaries.csv")
        self.assertNotIn(str(TOOL_ROOT), text)


if __name__ == "__main__":
    unittest.main()
