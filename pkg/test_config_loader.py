import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from config_loader import (
    ConfigError,
    cli_settings,
    load_config,
    max_partition_labels,
    numerics_settings,
    verify_settings,
)


class ConfigLoaderTest(unittest.TestCase):
    def test_shipped_defaults(self) -> None:
        with mock.patch.dict(os.environ, {}, clear=False):
            os.environ.pop("MQMI_SEED", None)
            os.environ.pop("MQMI_EIGENSOLVER", None)
            verify = verify_settings()
            numerics = numerics_settings()
            cli = cli_settings()
        self.assertAlmostEqual(verify.equality_tolerance, 1e-9)
        self.assertAlmostEqual(verify.slack_threshold, -1e-9)
        self.assertAlmostEqual(verify.witness_margin, -1e-6)
        self.assertEqual(numerics.eigensolver, "lapack")
        self.assertEqual(numerics.dimension_guard, 1024)
        self.assertEqual(numerics.jacobi_max_sweeps, 100)
        self.assertEqual(cli.seed, 1729)
        self.assertEqual(max_partition_labels(), 6)

    def test_environment_overrides(self) -> None:
        with mock.patch.dict(os.environ, {"MQMI_SEED": "7", "MQMI_EIGENSOLVER": "jacobi", "MQMI_LOG_LEVEL": "debug"}):
            self.assertEqual(cli_settings().seed, 7)
            self.assertEqual(cli_settings().log_level, "DEBUG")
            self.assertEqual(numerics_settings().eigensolver, "jacobi")

    def test_bad_environment_values(self) -> None:
        with mock.patch.dict(os.environ, {"MQMI_EIGENSOLVER": "qr"}):
            with self.assertRaises(ConfigError):
                numerics_settings()
        with mock.patch.dict(os.environ, {"MQMI_SEED": "seven"}):
            with self.assertRaises(ConfigError):
                cli_settings()

    def test_section_validation(self) -> None:
        with self.assertRaises(ConfigError):
            verify_settings({"verify": {"slack_threshold": 0.5}})
        with self.assertRaises(ConfigError):
            numerics_settings({"numerics": {"clamp_tolerance": -1}})
        with self.assertRaises(ConfigError):
            verify_settings({"verify": {"search": {"budget": 2.5}}})
        with self.assertRaises(ConfigError):
            cli_settings({"cli": {"output_format": "xml"}})

    def test_partial_sections_fall_back_to_defaults(self) -> None:
        settings = verify_settings({"verify": {"equality_tolerance": 1e-7}})
        self.assertAlmostEqual(settings.equality_tolerance, 1e-7)
        self.assertEqual(settings.table_samples, 40)

    def test_load_config_rejects_non_mapping(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "list.yaml"
            path.write_text("- 1\n- 2\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(path)
            with self.assertRaises(ConfigError):
                load_config(Path(tmp) / "missing.yaml")


if __name__ == "__main__":
    unittest.main()
