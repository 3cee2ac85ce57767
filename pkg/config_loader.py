"""YAML configuration loader for the MQMI toolkit."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

_CONFIG_PATH = Path(__file__).with_name("config.yaml")

_CONFIG_ENV = "MQMI_CONFIG"
_EIGENSOLVER_ENV = "MQMI_EIGENSOLVER"
_SEED_ENV = "MQMI_SEED"
_LOG_LEVEL_ENV = "MQMI_LOG_LEVEL"

_EIGENSOLVERS = {"lapack", "jacobi"}


class ConfigError(RuntimeError):
    """Raised when the static configuration cannot be parsed."""


def _parse_yaml(text: str) -> dict[str, Any]:
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"failed to parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top-level YAML must be a mapping")
    return data


@lru_cache(maxsize=4)
def load_config(path: str | Path | None = None) -> dict[str, Any]:
    if path:
        target = Path(path)
    else:
        target = Path(os.getenv(_CONFIG_ENV) or _CONFIG_PATH)
    if not target.exists():
        raise ConfigError(f"config file not found: {target}")
    return _parse_yaml(target.read_text(encoding="utf-8"))


CONFIG = load_config()


def _section(config: Mapping[str, Any], *names: str) -> Mapping[str, Any]:
    current: Any = config
    for name in names:
        current = current.get(name, {}) if isinstance(current, Mapping) else {}
    if not isinstance(current, Mapping):
        raise ConfigError(f"section {'.'.join(names)!r} must be a mapping")
    return current


def _coerce_positive(raw: Any, name: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be numeric, got {raw!r}") from exc
    if value <= 0 or not math.isfinite(value):
        raise ConfigError(f"{name} must be a positive finite number, got {raw!r}")
    return value


def _coerce_count(raw: Any, name: str) -> int:
    value = _coerce_positive(raw, name)
    if value != int(value):
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    return int(value)


@dataclass(frozen=True)
class NumericsSettings:
    clamp_tolerance: float = 1e-10
    hermitian_tolerance: float = 1e-10
    input_hermitian_tolerance: float = 1e-8
    trace_tolerance: float = 1e-10
    support_tolerance: float = 1e-8
    dimension_guard: int = 1024
    eigensolver: str = "lapack"
    jacobi_tolerance: float = 1e-12
    jacobi_max_sweeps: int = 100


@dataclass(frozen=True)
class VerifySettings:
    equality_tolerance: float = 1e-9
    slack_threshold: float = -1e-9
    near_condition_factor: float = 10.0
    witness_margin: float = -1e-6
    workers: int = 1
    alpha_upper: float = 10.0
    alpha_resolution: float = 1e-4
    search_budget: int = 20000
    search_step: float = 0.05
    search_min_step: float = 1e-4
    search_patience: int = 40
    table_samples: int = 40
    table_search_budget: int = 4000


@dataclass(frozen=True)
class CliSettings:
    seed: int = 1729
    samples: int = 200
    output_format: str = "table"
    log_level: str = "INFO"
    log_format: str = "%(message)s"


def numerics_settings(config: Optional[Mapping[str, Any]] = None) -> NumericsSettings:
    """Return the spectral tolerances and solver choice."""

    section = _section(config if config is not None else CONFIG, "numerics")
    jacobi = _section(section, "jacobi")
    solver = str(os.getenv(_EIGENSOLVER_ENV) or section.get("eigensolver", "lapack")).strip().lower()
    if solver not in _EIGENSOLVERS:
        raise ConfigError(f"numerics.eigensolver must be one of {sorted(_EIGENSOLVERS)}, got {solver!r}")
    return NumericsSettings(
        clamp_tolerance=_coerce_positive(section.get("clamp_tolerance", 1e-10), "numerics.clamp_tolerance"),
        hermitian_tolerance=_coerce_positive(section.get("hermitian_tolerance", 1e-10), "numerics.hermitian_tolerance"),
        input_hermitian_tolerance=_coerce_positive(
            section.get("input_hermitian_tolerance", 1e-8), "numerics.input_hermitian_tolerance"
        ),
        trace_tolerance=_coerce_positive(section.get("trace_tolerance", 1e-10), "numerics.trace_tolerance"),
        support_tolerance=_coerce_positive(section.get("support_tolerance", 1e-8), "numerics.support_tolerance"),
        dimension_guard=_coerce_count(section.get("dimension_guard", 1024), "numerics.dimension_guard"),
        eigensolver=solver,
        jacobi_tolerance=_coerce_positive(jacobi.get("off_norm_tolerance", 1e-12), "numerics.jacobi.off_norm_tolerance"),
        jacobi_max_sweeps=_coerce_count(jacobi.get("max_sweeps", 100), "numerics.jacobi.max_sweeps"),
    )


def max_partition_labels(config: Optional[Mapping[str, Any]] = None) -> int:
    section = _section(config if config is not None else CONFIG, "partitions")
    return _coerce_count(section.get("max_labels", 6), "partitions.max_labels")


def verify_settings(config: Optional[Mapping[str, Any]] = None) -> VerifySettings:
    """Return harness tolerances, alpha-fit range and search budgets."""

    section = _section(config if config is not None else CONFIG, "verify")
    alpha = _section(section, "alpha")
    search = _section(section, "search")
    table = _section(section, "table")
    slack = float(section.get("slack_threshold", -1e-9))
    witness = float(section.get("witness_margin", -1e-6))
    if slack > 0 or witness >= 0:
        raise ConfigError("verify.slack_threshold and verify.witness_margin must be negative")
    return VerifySettings(
        equality_tolerance=_coerce_positive(section.get("equality_tolerance", 1e-9), "verify.equality_tolerance"),
        slack_threshold=slack,
        near_condition_factor=_coerce_positive(section.get("near_condition_factor", 10), "verify.near_condition_factor"),
        witness_margin=witness,
        workers=_coerce_count(section.get("workers", 1), "verify.workers"),
        alpha_upper=_coerce_positive(alpha.get("upper", 10.0), "verify.alpha.upper"),
        alpha_resolution=_coerce_positive(alpha.get("resolution", 1e-4), "verify.alpha.resolution"),
        search_budget=_coerce_count(search.get("budget", 20000), "verify.search.budget"),
        search_step=_coerce_positive(search.get("step", 0.05), "verify.search.step"),
        search_min_step=_coerce_positive(search.get("min_step", 1e-4), "verify.search.min_step"),
        search_patience=_coerce_count(search.get("patience", 40), "verify.search.patience"),
        table_samples=_coerce_count(table.get("samples", 40), "verify.table.samples"),
        table_search_budget=_coerce_count(table.get("search_budget", 4000), "verify.table.search_budget"),
    )


def cli_settings(config: Optional[Mapping[str, Any]] = None) -> CliSettings:
    """Return CLI defaults, applying MQMI_SEED / MQMI_LOG_LEVEL overrides."""

    cfg = config if config is not None else CONFIG
    section = _section(cfg, "cli")
    logging_section = _section(cfg, "logging")
    raw_seed = os.getenv(_SEED_ENV)
    try:
        seed = int(raw_seed) if raw_seed else int(section.get("seed", 1729))
    except ValueError as exc:
        raise ConfigError(f"seed must be an integer, got {raw_seed!r}") from exc
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    output_format = str(section.get("output_format", "table"))
    if output_format not in {"json", "csv", "table"}:
        raise ConfigError(f"cli.output_format must be json, csv or table, got {output_format!r}")
    return CliSettings(
        seed=seed,
        samples=_coerce_count(section.get("samples", 200), "cli.samples"),
        output_format=output_format,
        log_level=str(os.getenv(_LOG_LEVEL_ENV) or logging_section.get("level", "INFO")).upper(),
        log_format=str(logging_section.get("format", "%(message)s")),
    )


__all__ = [
    "CONFIG",
    "CliSettings",
    "ConfigError",
    "NumericsSettings",
    "VerifySettings",
    "cli_settings",
    "load_config",
    "max_partition_labels",
    "numerics_settings",
    "verify_settings",
]
