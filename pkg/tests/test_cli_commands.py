"""
CLI Command Extensions for Flask
"""
import json
import logging
import os
import tempfile
from unittest import TestCase

from trotterlab import app
from trotterlab.common import status


class TestFlaskCLI(TestCase):
    """Test Flask CLI Commands"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.config["TESTING"] = True
        app.logger.setLevel(logging.CRITICAL)

    def setUp(self):
        self.runner = app.test_cli_runner()
        self.workdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.workdir.cleanup()
        app.config["MAX_SECTOR_DIM"] = 20000

    def _config(self, text):
        path = os.path.join(self.workdir.name, "config.json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        return path

    def test_hamiltonian_to_stdout(self):
        """It should write a CSV artifact to stdout"""
        result = self.runner.invoke(args=["hamiltonian", "--seed", "5", "--jobs", "1"])
        self.assertEqual(result.exit_code, status.EXIT_0_OK)
        self.assertIn("# command: hamiltonian", result.output)
        self.assertIn("# seed: 5", result.output)

    def test_out_file(self):
        """It should write a JSON artifact to the --out path"""
        out = os.path.join(self.workdir.name, "ratios.json")
        config = self._config(json.dumps({"grid": [{"n": 6, "eta": 2, "p": 1}]}))
        result = self.runner.invoke(args=["tightness", "--config", config, "--family", "V_first",
                                          "--format", "json", "--out", out, "--jobs", "1"])
        self.assertEqual(result.exit_code, status.EXIT_0_OK)
        with open(out, encoding="utf-8") as handle:
            document = json.load(handle)
        self.assertEqual(document["provenance"]["command"], "tightness")
        self.assertAlmostEqual(document["rows"][0]["ratio"], 0.75, places=9)

    def test_selfcheck(self):
        """It should pass the self-check on small systems"""
        config = self._config(json.dumps({"max_modes": 3, "trials": 1}))
        result = self.runner.invoke(args=["selfcheck", "--config", config, "--jobs", "1"])
        self.assertEqual(result.exit_code, status.EXIT_0_OK)

    def test_schema_violations(self):
        """It should exit with status 2 on bad configs"""
        for text in ('{"bogus": 1}', "{not json", '{"eta": "three"}', "[1, 2]"):
            result = self.runner.invoke(args=["commutator", "--config", self._config(text), "--jobs", "1"])
            self.assertEqual(result.exit_code, status.EXIT_2_SCHEMA_VIOLATION, text)

    def test_missing_config(self):
        """It should exit with status 2 when the config cannot be read"""
        missing = os.path.join(self.workdir.name, "missing.json")
        result = self.runner.invoke(args=["hamiltonian", "--config", missing])
        self.assertEqual(result.exit_code, status.EXIT_2_SCHEMA_VIOLATION)

    def test_bad_option(self):
        """It should let click reject unknown formats"""
        result = self.runner.invoke(args=["hamiltonian", "--format", "xml"])
        self.assertEqual(result.exit_code, 2)

    def test_budget_exceeded(self):
        """It should exit with status 3 when a sector is above the limit"""
        app.config["MAX_SECTOR_DIM"] = 10
        config = self._config(json.dumps({"instance": {"family": "random", "n": 6}, "eta": 3, "max_order": 1}))
        result = self.runner.invoke(args=["commutator", "--config", config, "--jobs", "1"])
        self.assertEqual(result.exit_code, status.EXIT_3_BUDGET_EXCEEDED)

    def test_numerical_failure(self):
        """It should exit with status 4 when a self-check fails"""
        config = self._config(json.dumps({"max_modes": 2, "trials": 1, "tol": -1.0}))
        result = self.runner.invoke(args=["selfcheck", "--config", config, "--jobs", "1"])
        self.assertEqual(result.exit_code, status.EXIT_4_NUMERICAL_FAILURE)
