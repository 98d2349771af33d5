#!/usr/bin/env python3
import json
import os
import tempfile
import unittest

import numpy as np

from cstar_isometry import codec
from cstar_isometry.algebra import AlgebraSignature
from cstar_isometry.cli import parse_config, run_cli
from cstar_isometry.errors import MalformedInput

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


class CliTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)

    def path(self, name: str) -> str:
        return os.path.join(self._tmp.name, name)

    def run_and_load(self, argv, output: str):
        code = run_cli(argv + ["--output", self.path(output)])
        with open(self.path(output), "r", encoding="utf-8") as f:
            return code, json.load(f)


class TestDecompose(CliTestCase):
    def test_identity_map(self) -> None:
        code, data = self.run_and_load(["decompose", "--map", fixture_path("id_map.json")], "cert.json")
        self.assertEqual(code, 0)
        self.assertEqual(data["P"], [True])
        self.assertEqual(data["J"]["perm"], [0])
        self.assertEqual(data["J"]["flags"], ["direct"])
        np.testing.assert_allclose(np.array(data["u"]["blocks"][0]), [[1, 0], [0, 0], [0, 0], [1, 0]], atol=1e-12)
        np.testing.assert_allclose(np.array(data["J"]["unitaries"][0]), [[1, 0], [0, 0], [0, 0], [1, 0]],
                                   atol=1e-12)

    def test_gaussian_reject(self) -> None:
        code, data = self.run_and_load(["decompose", "--map", fixture_path("gauss.json")], "failure.json")
        self.assertEqual(code, 2)
        self.assertEqual(data["stage"], "NotUnitaryAtIdentity")
        self.assertGreater(data["residual"], 1e-9)

    def test_output_is_deterministic(self) -> None:
        argv = ["decompose", "--map", fixture_path("conj.json")]
        self.assertEqual(run_cli(argv + ["--output", self.path("first.json")]), 0)
        self.assertEqual(run_cli(argv + ["--output", self.path("second.json")]), 0)
        with open(self.path("first.json"), "rb") as first, open(self.path("second.json"), "rb") as second:
            self.assertEqual(first.read(), second.read())


class TestBuildDecomposePipe(CliTestCase):
    def test_certificate_survives_the_pipe(self) -> None:
        self.assertEqual(run_cli(["build", "--certificate", fixture_path("cert.json"),
                                  "--output", self.path("map.json")]), 0)
        code, recovered = self.run_and_load(["decompose", "--map", self.path("map.json")], "cert.json")
        self.assertEqual(code, 0)
        with open(fixture_path("cert.json"), "r", encoding="utf-8") as f:
            original = json.load(f)
        with open(self.path("cert.json"), "r", encoding="utf-8") as f:
            self.assertEqual(f.read(), codec.dumps(original))
        self.assertEqual(recovered["P"], original["P"])
        self.assertEqual(recovered["J"]["perm"], original["J"]["perm"])
        self.assertEqual(recovered["J"]["flags"], original["J"]["flags"])
        for got, expected in zip(recovered["u"]["blocks"], original["u"]["blocks"]):
            np.testing.assert_allclose(np.array(got), np.array(expected), atol=1e-12)

        # Rebuilding the recovered certificate reproduces the map.
        self.assertEqual(run_cli(["build", "--certificate", self.path("cert.json"),
                                  "--output", self.path("rebuilt.json")]), 0)
        with open(self.path("map.json"), "r", encoding="utf-8") as f:
            first = codec.map_from_json(json.load(f))
        with open(self.path("rebuilt.json"), "r", encoding="utf-8") as f:
            second = codec.map_from_json(json.load(f))
        self.assertLessEqual(first.max_abs_difference(second), 1e-12)


class TestVerify(CliTestCase):
    def test_conjugation_metric(self) -> None:
        code, data = self.run_and_load(["verify", "--map", fixture_path("conj.json"), "--checks", "metric",
                                        "--trials", "100", "--seed", "1"], "report.json")
        self.assertEqual(code, 0)
        self.assertTrue(data["passed"])
        self.assertLessEqual(data["checks"]["metric"]["max_residual"], 1e-12)

    def test_default_checks_on_identity(self) -> None:
        code, data = self.run_and_load(["verify", "--map", fixture_path("id_map.json"), "--trials", "20"],
                                       "report.json")
        self.assertEqual(code, 0)
        for name in ("triple", "star", "square", "aba", "symmetry_square", "metric"):
            self.assertIn(name, data["checks"])

    def test_unnormalizable_map_fails(self) -> None:
        code, data = self.run_and_load(["verify", "--map", fixture_path("gauss.json"), "--checks", "star",
                                        "--trials", "5"], "report.json")
        self.assertEqual(code, 2)
        self.assertFalse(data["checks"]["normalized"]["passed"])


class TestClassifyAndFuzz(CliTestCase):
    def test_classify_identity(self) -> None:
        code, data = self.run_and_load(["classify", "--map", fixture_path("id_map.json")], "form.json")
        self.assertEqual(code, 0)
        self.assertEqual(data["form"], "conjugation")
        self.assertEqual(data["form_number"], 1)

    def test_classify_rejects_certificate_document(self) -> None:
        code = run_cli(["classify", "--map", fixture_path("cert.json"), "--output", self.path("x.json")])
        # A certificate is not a map document.
        self.assertEqual(code, 1)

    def test_fuzz_summary(self) -> None:
        code, data = self.run_and_load(["fuzz", "--signature", "1,2", "--trials", "5", "--seed", "3"],
                                       "fuzz.json")
        self.assertEqual(code, 0)
        self.assertEqual(codec.signature_from_json(data["signature"]), AlgebraSignature.of(1, 2))
        self.assertEqual(data["roundtrip_failures"], 0)
        self.assertEqual(data["false_accepts"], 0)
        self.assertEqual(sum(data["rejection_stages"].values()), 5)


class TestMalformedArguments(CliTestCase):
    def test_unknown_subcommand(self) -> None:
        self.assertEqual(run_cli(["explode"]), 1)

    def test_missing_file(self) -> None:
        self.assertEqual(run_cli(["decompose", "--map", self.path("absent.json")]), 1)

    def test_invalid_json(self) -> None:
        with open(self.path("broken.json"), "w", encoding="utf-8") as f:
            f.write("{\"domain\": [1]")
        self.assertEqual(run_cli(["decompose", "--map", self.path("broken.json")]), 1)

    def test_non_finite_map_entries(self) -> None:
        for literal in ("NaN", "Infinity", "-Infinity"):
            with open(self.path("bad.json"), "w", encoding="utf-8") as f:
                f.write('{"domain": [1], "codomain": [1], "matrix": [[' + literal + ', 0.0], [0.0, 1.0]]}')
            self.assertEqual(run_cli(["decompose", "--map", self.path("bad.json"),
                                      "--output", self.path("out.json")]), 1, literal)
            self.assertFalse(os.path.exists(self.path("out.json")))

    def test_unknown_check(self) -> None:
        self.assertEqual(run_cli(["verify", "--map", fixture_path("conj.json"), "--checks", "vibes"]), 1)

    def test_config_parsing(self) -> None:
        config = parse_config(["fuzz", "--signature", "2,2", "--trials", "7", "--tol", "1e-8"])
        self.assertEqual(config.signature, (2, 2))
        self.assertEqual(config.trials, 7)
        self.assertEqual(config.tol, 1e-8)
        with self.assertRaises(MalformedInput):
            parse_config(["fuzz", "--signature", "2,2", "--tol", "-1"])


if __name__ == '__main__':
    unittest.main()
