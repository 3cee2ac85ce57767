"""Fit the smallest exponent alpha with J^alpha(whole) >= sum J^alpha(parts) over an ensemble."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from scipy.optimize import brentq

from config_loader import VerifySettings, verify_settings
from entropy import MarginalEntropies
from mqmi import TYPE_THREE_KINDS, MqmiSpec, mqmi
from partitions import Partition
from tensor_core import DensityMatrix

from .ensembles import sample_state
from .report import COUNTEREXAMPLE, FAIL, PASS, CheckReport, SweepConfig, VerificationError, Witness, provenance

logger = logging.getLogger(__name__)

INEQUALITIES = ("monogamy", "complete", "tight")


@dataclass(frozen=True)
class AlphaTerms:
    lhs: float
    rhs: tuple[float, ...]
    partitions: tuple[str, ...]

    @property
    def vacuous(self) -> bool:
        return not any(self.rhs)

    @property
    def infeasible(self) -> bool:
        return self.lhs == 0.0 and not self.vacuous

    def slack(self, alpha: float) -> float:
        """lhs^alpha - sum rhs^alpha with 0^alpha = 0."""

        return _power(self.lhs, alpha) - sum(_power(r, alpha) for r in self.rhs)


def _power(value: float, alpha: float) -> float:
    return value**alpha if value > 0.0 else 0.0


def alpha_terms(rho: DensityMatrix, spec: MqmiSpec, inequality: str, settings: VerifySettings) -> AlphaTerms:
    if inequality not in INEQUALITIES:
        raise VerificationError(f"unknown inequality {inequality!r}; expected one of {INEQUALITIES}")
    if spec.kind in TYPE_THREE_KINDS:
        raise VerificationError(f"{spec.label} has no two-block form to fit against")
    a, b, c = rho.labels[:3]
    if inequality == "monogamy":
        whole = Partition.of((a,), (b, c))
        parts = [Partition.of((a,), (b,)), Partition.of((a,), (c,))]
    elif inequality == "complete":
        whole = Partition.of((a,), (b,), (c,))
        parts = [Partition.of((a,), (b,)), Partition.of((a,), (c,)), Partition.of((b,), (c,))]
    else:
        whole = Partition.of((a,), (b,), (c,))
        parts = [Partition.of((a,), (b, c)), Partition.of((b,), (c,))]
    entropies = MarginalEntropies(rho, spec.entropy)
    tol = settings.equality_tolerance

    def value(p: Partition) -> float:
        raw = mqmi(rho, p, spec, entropies=entropies).value
        return 0.0 if raw <= tol else raw

    return AlphaTerms(value(whole), tuple(value(p) for p in parts), tuple(str(p) for p in [whole, *parts]))


def minimal_alpha(terms: AlphaTerms, settings: VerifySettings) -> float:
    """Smallest alpha in [resolution, upper] meeting the inequality within tolerance; inf when none does.

    The crossing of lhs^alpha - sum rhs^alpha is bracketed and refined with Brent's method to ``alpha_resolution``.
    """

    tol = settings.equality_tolerance
    if terms.vacuous:
        return 0.0
    if terms.infeasible:
        return math.inf
    upper = settings.alpha_upper
    resolution = settings.alpha_resolution

    def feasibility(alpha: float) -> float:
        return terms.slack(alpha) + tol

    if feasibility(upper) < 0.0:
        return math.inf
    if feasibility(resolution) >= 0.0:
        return resolution
    try:
        root = brentq(feasibility, resolution, upper, xtol=0.5 * resolution, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise VerificationError(f"alpha root search failed on [{resolution}, {upper}]: {exc}") from exc
    # brentq may land just below the crossing
    for candidate in (root, root + 0.5 * resolution, upper):
        if candidate <= upper and feasibility(candidate) >= 0.0:
            return candidate
    return upper


def fit_alpha(
    config: SweepConfig,
    spec: MqmiSpec,
    inequality: str = "monogamy",
    *,
    settings: Optional[VerifySettings] = None,
    states: Optional[Sequence[DensityMatrix]] = None,
) -> CheckReport:
    """Ensemble supremum of the per-sample minimal alpha, with a bracketing certificate.

    The fitted alpha satisfies every sample; alpha / 2 is checked against the
    same samples and the number it violates is stored as the certificate.
    """

    settings = config.settings(settings or verify_settings())
    if inequality == "monogamy" and config.ensemble != "haar-pure" and states is None:
        raise VerificationError("the monogamy fit is restricted to pure states (ensemble haar-pure)")
    if len(config.layout.parties) < 3:
        raise VerificationError("alpha fits need at least three parties")
    samples = list(states) if states is not None else [sample_state(config, i) for i in range(config.samples)]
    terms = [alpha_terms(rho, spec, inequality, settings) for rho in samples]
    alphas = [minimal_alpha(t, settings) for t in terms]
    vacuous = sum(1 for t in terms if t.vacuous)
    check_id = f"alpha-{inequality}"

    worst = max(range(len(alphas)), key=lambda i: (alphas[i], -i))
    if math.isinf(alphas[worst]):
        reason = "left side vanishes while the right side does not" if terms[worst].infeasible else f"alpha exceeds {settings.alpha_upper}"
        logger.warning("[alpha] %s kind=%s sample=%d %s", inequality, spec, worst, reason)
        return CheckReport(
            check_id=check_id,
            spec=spec,
            samples=len(samples),
            min_margin=terms[worst].slack(settings.alpha_upper),
            verdict=FAIL,
            witness=Witness(samples[worst], terms[worst].partitions, terms[worst].slack(settings.alpha_upper), reason),
            details={"inequality": inequality, "sample_index": worst, "vacuous": vacuous, "config": config.to_dict()},
            provenance=provenance(settings, config.seed),
        )

    alpha = alphas[worst]
    margins = [t.slack(alpha) for t in terms if not t.vacuous]
    min_margin = min(margins) if margins else 0.0
    violations = sum(1 for m in margins if m < -settings.equality_tolerance)
    half_violations = sum(1 for t in terms if not t.vacuous and t.slack(alpha / 2.0) < -settings.equality_tolerance)
    if alpha > 0 and half_violations == 0:
        logger.warning("[alpha] %s kind=%s certificate incomplete alpha=%.4f half_violations=0", inequality, spec, alpha)
    if abs(alpha - round(alpha)) <= settings.alpha_resolution and alpha > 0:
        logger.info("[alpha] %s kind=%s boundary alpha=%.4f", inequality, spec, alpha)
    logger.info("[alpha] %s kind=%s samples=%d alpha=%.4f half_violations=%d", inequality, spec, len(samples), alpha, half_violations)
    verdict = PASS if violations == 0 else COUNTEREXAMPLE
    witness = None
    if verdict != PASS:
        index = min(range(len(terms)), key=lambda i: terms[i].slack(alpha))
        witness = Witness(samples[index], terms[index].partitions, terms[index].slack(alpha), "violates the fitted alpha")
    return CheckReport(
        check_id=check_id,
        spec=spec,
        samples=len(samples),
        min_margin=min_margin,
        verdict=verdict,
        witness=witness,
        alpha=alpha,
        details={
            "inequality": inequality,
            "vacuous": vacuous,
            "violations_at_alpha": violations,
            "violations_at_half_alpha": half_violations,
            "certified": alpha == 0.0 or half_violations > 0,
            "worst_sample": worst,
            "config": config.to_dict(),
        },
        provenance=provenance(settings, config.seed),
    )


__all__ = ["AlphaTerms", "INEQUALITIES", "alpha_terms", "fit_alpha", "minimal_alpha"]
