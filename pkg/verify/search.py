"""Derivative-free counterexample search.

Restart states cycle through the pair-product, hs-mixed (random rank) and
haar-pure ensembles. From each restart a hill climb perturbs one Hermitian
coordinate pair at a time, projects back to a density matrix and keeps the
move only if the target margin drops. The step halves after ``patience``
rejected moves and the climb restarts once the step falls below
``min_step``. The budget counts margin evaluations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from config_loader import VerifySettings, verify_settings
from mqmi import MqmiSpec
from tensor_core import DensityMatrix, SubsystemLayout, TensorError, project_to_state

from .checks import move_margin, nonnegative_margin, ssa_margin_check, triangle_margin
from .ensembles import draw
from .report import COUNTEREXAMPLE, PASS, CheckReport, Evaluation, VerificationError, Witness, provenance

logger = logging.getLogger(__name__)

RESTART_ENSEMBLES = ("pair-product", "hs-mixed", "haar-pure")

Objective = Callable[[DensityMatrix, MqmiSpec, VerifySettings], Evaluation]


@dataclass(frozen=True)
class SearchTarget:
    name: str
    kind: str
    parties: int
    objective: Objective
    description: str
    expect_witness: bool = True


SEARCH_TARGETS: dict[str, SearchTarget] = {
    "tsallis-ssa-violation": SearchTarget(
        "tsallis-ssa-violation", "Iq", 3, ssa_margin_check, "S_q(AB) + S_q(BC) < S_q(ABC) + S_q(B)"
    ),
    "iq-type-c-increase": SearchTarget(
        "iq-type-c-increase",
        "Iq",
        3,
        lambda rho, spec, settings: move_margin(rho, spec, settings, kinds="c"),
        "Iq grows under a single party drop",
    ),
    "iq-triangle-violation": SearchTarget(
        "iq-triangle-violation", "Iq", 4, triangle_margin, "a triangle relation fails for Iq"
    ),
    "iqprime-negativity": SearchTarget(
        "iqprime-negativity", "Iqprime", 3, nonnegative_margin, "Iq' takes a negative value", expect_witness=False
    ),
    "iqprime-triangle-violation": SearchTarget(
        "iqprime-triangle-violation", "Iqprime", 4, triangle_margin, "a triangle relation fails for Iq'"
    ),
}


def get_target(name: str) -> SearchTarget:
    try:
        return SEARCH_TARGETS[name]
    except KeyError as exc:
        raise VerificationError(f"unknown search target {name!r}; expected one of {sorted(SEARCH_TARGETS)}") from exc


def _perturb(rho: DensityMatrix, step: float, rng: np.random.Generator) -> DensityMatrix:
    dim = rho.dim
    i, j = (int(k) for k in rng.integers(dim, size=2))
    matrix = np.array(rho.matrix)
    if i == j:
        matrix[i, i] += step * rng.standard_normal()
    else:
        delta = step * complex(rng.standard_normal(), rng.standard_normal())
        matrix[i, j] += delta
        matrix[j, i] += np.conj(delta)
    return project_to_state(matrix, rho.layout)


def search(
    target: str,
    *,
    q: float = 2.0,
    budget: Optional[int] = None,
    seed: int = 0,
    layout: Optional[SubsystemLayout] = None,
    settings: Optional[VerifySettings] = None,
) -> CheckReport:
    """Hill-climb the target's margin until it drops below ``witness_margin`` or the budget runs out."""

    settings = settings or verify_settings()
    spec_target = get_target(target)
    spec = MqmiSpec.parse(spec_target.kind, q)
    layout = layout or SubsystemLayout.qubits(spec_target.parties)
    if len(layout.parties) != spec_target.parties:
        raise VerificationError(f"{target} runs on {spec_target.parties} parties, got layout {layout}")
    budget = budget if budget is not None else settings.search_budget
    if budget < 1:
        raise VerificationError(f"budget must be positive, got {budget}")
    rng = np.random.default_rng(seed)

    evaluations = 0
    restarts = 0
    best: Optional[tuple[Evaluation, DensityMatrix, str]] = None
    found = False
    while evaluations < budget and not found:
        ensemble = RESTART_ENSEMBLES[restarts % len(RESTART_ENSEMBLES)]
        restarts += 1
        rho = draw(ensemble, layout, rng)
        current = spec_target.objective(rho, spec, settings)
        evaluations += 1
        step = settings.search_step
        rejected = 0
        while True:
            if best is None or current.margin < best[0].margin:
                best = (current, rho, ensemble)
            if current.margin < settings.witness_margin:
                found = True
                break
            if evaluations >= budget or step < settings.search_min_step:
                break
            evaluations += 1
            try:
                candidate = _perturb(rho, step, rng)
                evaluation: Optional[Evaluation] = spec_target.objective(candidate, spec, settings)
            except TensorError:
                evaluation = None
            if evaluation is not None and evaluation.margin < current.margin:
                rho, current = candidate, evaluation
                rejected = 0
            else:
                rejected += 1
                if rejected >= settings.search_patience:
                    step /= 2.0
                    rejected = 0

    assert best is not None
    winner, state, ensemble = best
    verdict = COUNTEREXAMPLE if found else PASS
    logger.info(
        "[search] target=%s kind=%s verdict=%s evaluations=%d restarts=%d best_margin=%.3e",
        target,
        spec,
        verdict,
        evaluations,
        restarts,
        winner.margin,
    )
    return CheckReport(
        check_id=f"search:{target}",
        spec=spec,
        samples=evaluations,
        min_margin=winner.margin,
        verdict=verdict,
        witness=Witness(state, winner.partitions, winner.margin, spec_target.description) if found else None,
        details={
            "target": target,
            "budget": budget,
            "evaluations": evaluations,
            "restarts": restarts,
            "found": found,
            "restart_ensemble": ensemble,
            "best": dict(winner.details),
        },
        provenance=provenance(settings, seed),
    )


__all__ = ["RESTART_ENSEMBLES", "SEARCH_TARGETS", "SearchTarget", "get_target", "search"]
