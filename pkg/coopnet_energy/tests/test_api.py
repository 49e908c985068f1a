"""Tests for the dict-returning API endpoints."""

import os
import tempfile
import unittest
from unittest.mock import patch

CONFIG = """
sweep.schemes = direct, df_mrc
sweep.b_values = [4, 8]
sweep.d_sd_values = [60]
"""


class TestEvaluationAPI(unittest.TestCase):
    """Test suite for evaluation endpoints."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.config_path = os.path.join(self.tmp.name, "grid.cfg")
        with open(self.config_path, "w", encoding="utf-8") as f:
            f.write(CONFIG)

    def test_get_parameter_defaults(self):
        """Test get_parameter_defaults returns both parameter sets."""
        from coopnet_energy.api.evaluation import get_parameter_defaults

        result = get_parameter_defaults()

        self.assertTrue(result["success"])
        self.assertEqual(result["params"]["l_bits"], 20000)
        self.assertEqual(result["settings"]["mrc_outage_model"], "joint")

    def test_get_point_summary(self):
        """Test get_point_summary returns the scheme result and the optimal b."""
        from coopnet_energy.api.evaluation import get_point_summary

        result = get_point_summary("af_mrc", 10, 5.0)

        self.assertTrue(result["success"])
        self.assertEqual(result["result"]["kind"], "af_mrc")
        self.assertEqual(result["result"]["b"], 10)
        self.assertEqual(result["optimal_b"], 10)
        self.assertGreater(result["result"]["e_bit"], 0)

    def test_get_point_summary_with_overrides(self):
        """Test parameter and outage model overrides are applied."""
        from coopnet_energy.api.evaluation import get_point_summary

        joint = get_point_summary("af_mrc", 10, 100.0, params={"beta": 3.0})
        product = get_point_summary("af_mrc", 10, 100.0, params={"beta": 3.0}, outage_model="product")

        self.assertTrue(product["success"])
        self.assertGreater(joint["result"]["p_success"], product["result"]["p_success"])

    def test_get_point_summary_invalid(self):
        """Test invalid input comes back as a failure message."""
        from coopnet_energy.api.evaluation import get_point_summary

        for kwargs in ({"scheme": "cf", "b": 4, "d_sd": 50.0},
                       {"scheme": "af", "b": 3, "d_sd": 50.0},
                       {"scheme": "af", "b": 4, "d_sd": 50.0, "params": {"eta": 1.1}}):
            result = get_point_summary(**kwargs)
            self.assertFalse(result["success"], kwargs)
            self.assertTrue(result["message"])

    def test_run_sweep_to_csv(self):
        """Test run_sweep_to_csv writes the grid and counts rows."""
        from coopnet_energy.api.evaluation import run_sweep_to_csv

        out_path = os.path.join(self.tmp.name, "out.csv")
        result = run_sweep_to_csv(self.config_path, out_path)

        self.assertTrue(result["success"])
        self.assertEqual(result["rows"], 4)
        self.assertEqual(result["flagged"], 0)
        with open(out_path, encoding="utf-8") as f:
            self.assertEqual(len(f.read().splitlines()), 5)

    def test_run_sweep_to_csv_trials_enable_simulation(self):
        """Test a trials override adds the simulated columns."""
        from coopnet_energy.api.evaluation import run_sweep_to_csv

        out_path = os.path.join(self.tmp.name, "out.csv")
        result = run_sweep_to_csv(self.config_path, out_path, trials=200, seed=7)

        self.assertTrue(result["success"])
        with open(out_path, encoding="utf-8") as f:
            self.assertIn("mc_p_success", f.readline())

    def test_run_sweep_to_csv_missing_config(self):
        """Test a missing config file is reported and logged."""
        from coopnet_energy.api.evaluation import run_sweep_to_csv

        with self.assertLogs("coopnet_energy.api.evaluation", level="ERROR"):
            result = run_sweep_to_csv(os.path.join(self.tmp.name, "nope.cfg"), "out.csv")

        self.assertFalse(result["success"])
        self.assertEqual(result["rows"], 0)

    def test_validate_sweep(self):
        """Test validate_sweep reports the verdict as success."""
        from coopnet_energy.api.evaluation import validate_sweep

        result = validate_sweep(self.config_path, trials=20000, seed=42)

        self.assertEqual(result["success"], result["report"]["passed"])
        self.assertTrue(result["message"].startswith(("PASS", "FAIL")))
        self.assertEqual(result["report"]["z_threshold"], 3.0)

    @patch("coopnet_energy.utils.sweep.validate")
    def test_validate_sweep_defaults_trials(self, mock_validate):
        """Test validation without an mc section simulates the default trial count."""
        from coopnet_energy.api.evaluation import validate_sweep
        from coopnet_energy.utils.sweep import DEFAULT_MC_TRIALS

        mock_validate.side_effect = RuntimeError("stop")

        with self.assertRaises(RuntimeError):
            validate_sweep(self.config_path, seed=5)

        spec = mock_validate.call_args[0][0]
        self.assertEqual(spec.mc.trials, DEFAULT_MC_TRIALS)
        self.assertEqual(spec.mc.seed, 5)


if __name__ == "__main__":
    unittest.main()
