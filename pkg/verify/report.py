from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from config_loader import VerifySettings
from mqmi import MqmiSpec
from tensor_core import DensityMatrix, SubsystemLayout, TensorError

CODE_VERSION = "mqmi-lab 0.1.0"

PASS = "pass"
FAIL = "fail"
COUNTEREXAMPLE = "counterexample-found"
VERDICTS = (PASS, FAIL, COUNTEREXAMPLE)

ENSEMBLES = ("haar-pure", "hs-mixed", "pair-product", "half-product")


class VerificationError(ValueError):
    """Raised when a check is asked for something its preconditions rule out."""


@dataclass(frozen=True, eq=False)
class Evaluation:
    """One margin from one state; negative beyond the threshold means a violation."""

    margin: float
    partitions: tuple[str, ...] = ()
    details: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.margin):
            raise VerificationError(f"margin must be finite, got {self.margin}")


@dataclass(frozen=True, eq=False)
class Witness:
    state: Optional[DensityMatrix]
    partitions: tuple[str, ...]
    margin: float
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "state": self.state.to_dict() if self.state is not None else None,
            "partitions": list(self.partitions),
            "margin": self.margin,
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class CheckReport:
    check_id: str
    spec: Optional[MqmiSpec]
    samples: int
    min_margin: float
    verdict: str
    witness: Optional[Witness] = None
    alpha: Optional[float] = None
    details: Mapping[str, Any] = field(default_factory=dict)
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise VerificationError(f"unknown verdict {self.verdict!r}")
        if not math.isfinite(self.min_margin):
            raise VerificationError(f"{self.check_id}: min margin must be finite, got {self.min_margin}")
        if self.verdict != PASS and self.witness is None:
            raise VerificationError(f"{self.check_id}: verdict {self.verdict} needs a witness")
        if self.samples < 1:
            raise VerificationError(f"{self.check_id}: sample count must be positive")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary(self) -> str:
        parts = [f"[{self.check_id}]", f"verdict={self.verdict}", f"samples={self.samples}", f"min_margin={self.min_margin:.3e}"]
        if self.spec is not None:
            parts.insert(1, f"kind={self.spec}")
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha:.4f}")
        if self.witness is not None and self.witness.partitions:
            parts.append("partitions=" + ",".join(self.witness.partitions))
        return " ".join(parts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check_id": self.check_id,
            "spec": self.spec.to_dict() if self.spec is not None else None,
            "samples": self.samples,
            "min_margin": self.min_margin,
            "verdict": self.verdict,
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "alpha": self.alpha,
            "details": dict(self.details),
            "provenance": dict(self.provenance),
        }


@dataclass(frozen=True)
class SweepConfig:
    ensemble: str
    layout: SubsystemLayout
    samples: int
    seed: int
    rank: Optional[int] = None
    tolerance: Optional[float] = None
    slack: Optional[float] = None

    def __post_init__(self) -> None:
        if self.ensemble not in ENSEMBLES:
            raise VerificationError(f"unknown ensemble {self.ensemble!r}; expected one of {ENSEMBLES}")
        if self.samples < 1:
            raise VerificationError(f"samples must be >= 1, got {self.samples}")
        if self.seed < 0:
            raise VerificationError(f"seed must be non-negative, got {self.seed}")
        if len(self.layout.parties) < 2:
            raise VerificationError("a sweep layout needs at least two parties")
        if self.rank is not None:
            if self.ensemble != "hs-mixed":
                raise VerificationError("rank only applies to the hs-mixed ensemble")
            if not 1 <= self.rank <= self.layout.total_dim:
                raise VerificationError(f"rank must be in [1, {self.layout.total_dim}], got {self.rank}")
        if self.tolerance is not None and self.tolerance <= 0:
            raise VerificationError("tolerance override must be positive")
        if self.slack is not None and self.slack > 0:
            raise VerificationError("slack override must be <= 0")

    def settings(self, base: VerifySettings) -> VerifySettings:
        updated = base
        if self.tolerance is not None:
            updated = replace(updated, equality_tolerance=self.tolerance)
        if self.slack is not None:
            updated = replace(updated, slack_threshold=self.slack)
        return updated

    def to_dict(self) -> dict[str, Any]:
        return {
            "ensemble": self.ensemble,
            "parties": self.layout.to_list(),
            "samples": self.samples,
            "seed": self.seed,
            "rank": self.rank,
            "tolerance": self.tolerance,
            "slack": self.slack,
        }


def provenance(settings: VerifySettings, seed: Optional[int] = None) -> dict[str, Any]:
    return {
        "code_version": CODE_VERSION,
        "seed": seed,
        "equality_tolerance": settings.equality_tolerance,
        "slack_threshold": settings.slack_threshold,
    }


def write_json(payload: Mapping[str, Any] | list[Any], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    target.write_text(text + "\n", encoding="utf-8")
    return target


def witness_state(witness: Optional[Witness]) -> DensityMatrix:
    if witness is None or witness.state is None:
        raise TensorError("report carries no witness state")
    return witness.state


__all__ = [
    "COUNTEREXAMPLE",
    "CODE_VERSION",
    "CheckReport",
    "ENSEMBLES",
    "Evaluation",
    "FAIL",
    "PASS",
    "SweepConfig",
    "VERDICTS",
    "VerificationError",
    "Witness",
    "provenance",
    "write_json",
]
