from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from config_loader import VerifySettings, verify_settings
from mqmi import MqmiSpec
from tensor_core import DensityMatrix

from .checks import CHECKS, CheckDef, get_check, verdict_for
from .ensembles import sample_state
from .report import PASS, CheckReport, Evaluation, SweepConfig, VerificationError, Witness, provenance

logger = logging.getLogger(__name__)

SWEEP_CHECKS = tuple(CHECKS)


@dataclass
class _Fold:
    """Running minimum of one check; ties keep the earliest sample."""

    check: CheckDef
    min_margin: Optional[float] = None
    index: int = -1
    evaluation: Optional[Evaluation] = None
    state: Optional[DensityMatrix] = None
    violations: int = 0

    def add(self, index: int, rho: DensityMatrix, evaluation: Evaluation, settings: VerifySettings) -> None:
        if verdict_for(self.check, evaluation.margin, settings) != PASS:
            self.violations += 1
        if self.min_margin is None or evaluation.margin < self.min_margin:
            self.min_margin = evaluation.margin
            self.index = index
            self.evaluation = evaluation
            self.state = rho


def _evaluate_sample(
    config: SweepConfig,
    index: int,
    checks: Sequence[CheckDef],
    spec: MqmiSpec,
    settings: VerifySettings,
) -> tuple[DensityMatrix, list[Evaluation]]:
    rho = sample_state(config, index)
    return rho, [check.evaluate(rho, spec, settings) for check in checks]


def run_sweep(
    config: SweepConfig,
    checks: Sequence[str],
    spec: MqmiSpec,
    *,
    settings: Optional[VerifySettings] = None,
    workers: Optional[int] = None,
) -> list[CheckReport]:
    """Run the named checks over ``config.samples`` states; one report per check.

    Sample ``i`` is drawn from SeedSequence([seed, i]) and results are folded in
    index order, so the reports do not depend on ``workers``.
    """

    if not checks:
        raise VerificationError("run_sweep needs at least one check")
    settings = config.settings(settings or verify_settings())
    defs = [get_check(name) for name in checks]
    folds = [_Fold(check) for check in defs]
    workers = workers if workers is not None else settings.workers
    indices = range(config.samples)

    def task(index: int) -> tuple[DensityMatrix, list[Evaluation]]:
        return _evaluate_sample(config, index, defs, spec, settings)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, indices))
    else:
        results = [task(index) for index in indices]

    for index, (rho, evaluations) in enumerate(results):
        for fold, evaluation in zip(folds, evaluations):
            fold.add(index, rho, evaluation, settings)

    reports = []
    for fold in folds:
        assert fold.evaluation is not None and fold.min_margin is not None
        verdict = verdict_for(fold.check, fold.min_margin, settings)
        witness = None
        if verdict != PASS:
            witness = Witness(fold.state, fold.evaluation.partitions, fold.min_margin, f"sample {fold.index}")
        logger.info(
            "[sweep] check=%s kind=%s ensemble=%s samples=%d min_margin=%.3e violations=%d",
            fold.check.name,
            spec,
            config.ensemble,
            config.samples,
            fold.min_margin,
            fold.violations,
        )
        reports.append(
            CheckReport(
                check_id=fold.check.name,
                spec=spec,
                samples=config.samples,
                min_margin=fold.min_margin,
                verdict=verdict,
                witness=witness,
                details={
                    "config": config.to_dict(),
                    "violations": fold.violations,
                    "worst_sample": fold.index,
                    "worst": dict(fold.evaluation.details),
                },
                provenance=provenance(settings, config.seed),
            )
        )
    return reports


__all__ = ["SWEEP_CHECKS", "run_sweep"]
