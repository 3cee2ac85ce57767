"""Property checks over a single state.

Every check has an evaluator ``(rho, spec, settings) -> Evaluation`` that the
sweep and search engines share, and a public ``check_*`` wrapper that turns
one evaluation into a :class:`CheckReport`. Inequality checks flag a violation
when the margin drops below ``slack_threshold``; conditional checks (the
monogamy family and additivity) report ``tol - value`` once their condition
holds and ``|gap| - tol`` otherwise, so a violation is any negative margin.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

from config_loader import VerifySettings, verify_settings
from entropy import MarginalEntropies, spectral_entropy
from mqmi import TYPE_THREE_KINDS, MqmiSpec, mqmi, pure_ef, pure_eq
from partitions import (
    Partition,
    PartitionError,
    all_partitions,
    coarsening_pairs,
    is_coarser,
    is_discard_coarsening,
    is_merge_coarsening,
    xi_set,
)
from states import pure_state
from tensor_core import SETTINGS, DensityMatrix, hermitian_eigh, permute_parties

from .report import COUNTEREXAMPLE, PASS, CheckReport, Evaluation, VerificationError, Witness, provenance

logger = logging.getLogger(__name__)

Evaluator = Callable[[DensityMatrix, MqmiSpec, VerifySettings], Evaluation]


def _p(*blocks: Iterable[str]) -> Partition:
    return Partition.of(*blocks)


def _defined(spec: MqmiSpec, partition: Partition) -> bool:
    if len(partition) < 2:
        return False
    return spec.kind not in TYPE_THREE_KINDS or len(partition) == 3


def _none_if_inf(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


class _Values:
    """J evaluated on partitions of one state, sharing one marginal-entropy cache."""

    def __init__(self, rho: DensityMatrix, spec: MqmiSpec) -> None:
        self.rho = rho
        self.spec = spec
        self.entropies = MarginalEntropies(rho, spec.entropy)

    def __call__(self, partition: Partition) -> float:
        return mqmi(self.rho, partition, self.spec, entropies=self.entropies).value


def _three(rho: DensityMatrix, parties: Optional[Sequence[str]]) -> tuple[str, str, str]:
    chosen = tuple(parties) if parties is not None else rho.labels[:3]
    if len(chosen) != 3 or len(set(chosen)) != 3:
        raise VerificationError(f"need three distinct parties, got {list(chosen)}")
    missing = set(chosen).difference(rho.labels)
    if missing:
        raise VerificationError(f"parties {sorted(missing)} are not in layout {rho.labels}")
    return chosen  # type: ignore[return-value]


def _conditional_margin(gap: float, value: float, settings: VerifySettings, context: str) -> tuple[float, bool]:
    tol = settings.equality_tolerance
    if abs(gap) <= tol:
        return tol - value, True
    if abs(gap) <= settings.near_condition_factor * tol:
        logger.info("[verify] near-condition %s gap=%.3e value=%.6f", context, gap, value)
    return abs(gap) - tol, False


def coarsening_margin(
    rho: DensityMatrix,
    spec: MqmiSpec,
    settings: VerifySettings,
    *,
    include_c: bool = True,
) -> Evaluation:
    """min(J(finer) - J(coarser)) over every coarser-partition pair of the layout."""

    labels = rho.labels
    if len(labels) > 5:
        raise VerificationError(f"coarsening checks are limited to 5 parties, got {len(labels)}")
    pairs = coarsening_pairs(tuple(labels))
    values = _Values(rho, spec)
    closure = {"ab": math.inf, "c": math.inf}
    best: Optional[tuple[float, Partition, Partition]] = None
    for finer, coarser, needs_c in pairs.closure:
        if not (_defined(spec, finer) and _defined(spec, coarser)):
            continue
        margin = values(finer) - values(coarser)
        key = "c" if needs_c else "ab"
        closure[key] = min(closure[key], margin)
        if needs_c and not include_c:
            continue
        if best is None or margin < best[0]:
            best = (margin, finer, coarser)
    steps = {"a": math.inf, "b": math.inf, "c": math.inf}
    worst_step: dict[str, tuple[str, str]] = {}
    for finer, coarser, kind in pairs.steps:
        if not (_defined(spec, finer) and _defined(spec, coarser)):
            continue
        margin = values(finer) - values(coarser)
        if margin < steps[kind]:
            steps[kind] = margin
            worst_step[kind] = (str(finer), str(coarser))
    if best is None:
        raise VerificationError(f"no coarsening pair of {labels} is defined for {spec}")
    details = {
        "min_ab": _none_if_inf(closure["ab"]),
        "min_c": _none_if_inf(closure["c"]),
        "include_c": include_c,
    }
    for kind, value in steps.items():
        details[f"step_{kind}"] = _none_if_inf(value)
        if kind in worst_step:
            details[f"step_{kind}_pair"] = "->".join(worst_step[kind])
    return Evaluation(best[0], (str(best[1]), str(best[2])), details)


def pair_margin(
    rho: DensityMatrix,
    spec: MqmiSpec,
    settings: VerifySettings,
    *,
    finer: Partition,
    coarser: Partition,
) -> Evaluation:
    """J(finer) - J(coarser) for one explicit pair; nothing is enumerated, so the party limit does not apply."""

    chain = is_coarser(finer, coarser)
    if not chain:
        raise VerificationError(f"{coarser} is not coarser than {finer}")
    if not (_defined(spec, finer) and _defined(spec, coarser)):
        raise VerificationError(f"{spec} is not defined on both {finer} and {coarser}")
    values = _Values(rho, spec)
    steps = [(a, b) for a, b in zip(chain.path, chain.path[1:]) if _defined(spec, a) and _defined(spec, b)]
    step_min = min((values(a) - values(b) for a, b in steps), default=math.inf)
    return Evaluation(
        values(finer) - values(coarser),
        (str(finer), str(coarser)),
        {"moves": chain.describe(), "step_min": _none_if_inf(step_min)},
    )


def move_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings, *, kinds: str) -> Evaluation:
    """min(J(finer) - J(coarser)) over single moves of the given kinds."""

    values = _Values(rho, spec)
    best: Optional[tuple[float, Partition, Partition]] = None
    for finer, coarser, kind in coarsening_pairs(tuple(rho.labels)).steps:
        if kind not in kinds or not (_defined(spec, finer) and _defined(spec, coarser)):
            continue
        margin = values(finer) - values(coarser)
        if best is None or margin < best[0]:
            best = (margin, finer, coarser)
    if best is None:
        raise VerificationError(f"no single {kinds} move on {rho.labels} is defined for {spec}")
    return Evaluation(best[0], (str(best[1]), str(best[2])), {"kinds": kinds})


def discorrelated_margin(
    rho: DensityMatrix,
    spec: MqmiSpec,
    settings: VerifySettings,
    *,
    parties: Optional[Sequence[str]] = None,
) -> Evaluation:
    """J(A:BC) = J(A:B) should force J(A:C) = 0."""

    if spec.kind in TYPE_THREE_KINDS:
        raise VerificationError(f"{spec.label} has no two-block form")
    a, b, c = _three(rho, parties)
    values = _Values(rho, spec)
    whole = _p((a,), (b, c))
    part = _p((a,), (b,))
    other = _p((a,), (c,))
    lhs, rhs, value = values(whole), values(part), values(other)
    margin, met = _conditional_margin(lhs - rhs, value, settings, f"{whole}~{part}")
    return Evaluation(
        margin,
        (str(whole), str(part), str(other)),
        {"lhs": lhs, "rhs": rhs, "value": value, "condition_met": met},
    )


def complete_monogamy_margin(
    rho: DensityMatrix,
    spec: MqmiSpec,
    settings: VerifySettings,
    *,
    finer: Partition,
    coarser: Partition,
    variant: str = "auto",
) -> Evaluation:
    """J(finer) = J(coarser) should force J to vanish on every partition of the Xi-set."""

    discard = is_discard_coarsening(finer, coarser)
    merge = is_merge_coarsening(finer, coarser)
    if variant == "complete" and not discard:
        raise VerificationError(f"complete variant needs {finer} >a {coarser}")
    if variant == "tight" and not merge:
        raise VerificationError(f"tight variant needs {finer} >b {coarser}")
    if variant not in ("auto", "complete", "tight"):
        raise VerificationError(f"unknown variant {variant!r}")
    try:
        xi = sorted((g for g in xi_set(finer, coarser) if _defined(spec, g)), key=str)
    except PartitionError as exc:
        raise VerificationError(str(exc)) from exc
    values = _Values(rho, spec)
    lhs, rhs = values(finer), values(coarser)
    worst: Optional[tuple[float, Partition]] = None
    for gamma in xi:
        value = values(gamma)
        if worst is None or value > worst[0]:
            worst = (value, gamma)
    value = worst[0] if worst is not None else 0.0
    margin, met = _conditional_margin(lhs - rhs, value, settings, f"{finer}~{coarser}")
    named = (str(finer), str(coarser)) + ((str(worst[1]),) if worst is not None else ())
    return Evaluation(
        margin,
        named,
        {
            "relation": "discard" if discard else "merge",
            "lhs": lhs,
            "rhs": rhs,
            "xi_max": value,
            "xi_size": len(xi),
            "condition_met": met,
        },
    )


def _triangle_forms(labels: Sequence[str]) -> Iterable[tuple[str, Partition, Partition, Partition]]:
    triples = [tuple(labels)] if len(labels) == 3 else list(itertools.combinations(labels, 3))
    for triple in triples:
        for a, b, c in itertools.permutations(triple):
            yield "A:BC", _p((a,), (b, c)), _p((b,), (a, c)), _p((a, b), (c,))
    if len(labels) == 4:
        for a, b, c, d in itertools.permutations(labels):
            yield "AB:CD", _p((a, b), (c, d)), _p((a, c), (b, d)), _p((a, d), (b, c))
            yield "A:B:CD", _p((a,), (b,), (c, d)), _p((a,), (b, d), (c,)), _p((a, d), (b,), (c,))


def triangle_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """min over forms and relabelings of J(rhs1) + J(rhs2) - J(lhs)."""

    labels = rho.labels
    if len(labels) not in (3, 4):
        raise VerificationError(f"triangle relations need 3 or 4 parties, got {len(labels)}")
    values = _Values(rho, spec)
    best: Optional[tuple[float, str, tuple[Partition, ...]]] = None
    per_form: dict[str, float] = {}
    for form, lhs, rhs1, rhs2 in _triangle_forms(labels):
        if not all(_defined(spec, p) for p in (lhs, rhs1, rhs2)):
            continue
        slack = values(rhs1) + values(rhs2) - values(lhs)
        per_form[form] = min(per_form.get(form, math.inf), slack)
        if best is None or slack < best[0]:
            best = (slack, form, (lhs, rhs1, rhs2))
    if best is None:
        raise VerificationError(f"no triangle form on {labels} is defined for {spec}")
    return Evaluation(best[0], tuple(str(p) for p in best[2]), {"form": best[1], "per_form": per_form})


def entropy_bound_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """J(rho) + S(rho) - 2 sum_i p_i E(psi_i) over the eigendecomposition of rho.

    Pure inputs must meet the bound with equality, so their margin is -|gap|.
    """

    if spec.base != "I":
        raise VerificationError(f"the entropy bound is stated for I and Iq, not {spec.label}")
    full = Partition.singletons(rho.labels)
    value = mqmi(rho, full, spec).value
    entropy_value = spectral_entropy(rho.spectrum, spec.entropy)
    weights, vectors = hermitian_eigh(rho.matrix)
    e_term = 0.0
    terms = 0
    for weight, vector in zip(weights, vectors.T):
        if weight <= SETTINGS.clamp_tolerance:
            continue
        psi = pure_state(vector, rho.layout)
        e = pure_eq(psi, full, spec.q) if spec.is_tsallis else pure_ef(psi, full)  # type: ignore[arg-type]
        e_term += float(weight) * 2.0 * e
        terms += 1
    gap = value + entropy_value - e_term
    pure = rho.is_pure()
    margin = -abs(gap) if pure else gap
    return Evaluation(
        margin,
        (str(full),),
        {"mqmi": value, "entropy": entropy_value, "e_term": e_term, "pure": pure, "terms": terms, "gap": gap},
    )


def nonnegative_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """Smallest value of J over every partition of every subset of parties."""

    values = _Values(rho, spec)
    best: Optional[tuple[float, Partition]] = None
    for partition in sorted(all_partitions(rho.labels), key=str):
        if not _defined(spec, partition):
            continue
        value = values(partition)
        if best is None or value < best[0]:
            best = (value, partition)
    if best is None:
        raise VerificationError(f"no partition of {rho.labels} is defined for {spec}")
    return Evaluation(best[0], (str(best[1]),), {"value": best[0]})


def symmetric_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """-max |J(permuted) - J(rho)| when the tensor factors are physically reordered."""

    values = _Values(rho, spec)
    targets = [p for p in sorted(all_partitions(rho.labels), key=str) if p.parties == frozenset(rho.labels) and _defined(spec, p)]
    if not targets:
        raise VerificationError(f"no full partition of {rho.labels} is defined for {spec}")
    worst = 0.0
    where: tuple[str, ...] = (str(targets[0]),)
    for order in itertools.permutations(rho.labels):
        if order == rho.labels:
            continue
        permuted = _Values(permute_parties(rho, order), spec)
        for partition in targets:
            deviation = abs(permuted(partition) - values(partition))
            if deviation > worst:
                worst = deviation
                where = (str(partition), ",".join(order))
    return Evaluation(-worst, where, {"max_deviation": worst})


def additivity_margin(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """J(X:Y) = 0 for the two halves X, Y should give J(all) = J(X parts) + J(Y parts)."""

    if spec.kind in TYPE_THREE_KINDS:
        raise VerificationError(f"additivity is not defined for {spec.label}")
    labels = rho.labels
    if len(labels) < 3:
        raise VerificationError("additivity needs at least three parties")
    cut = math.ceil(len(labels) / 2)
    x, y = labels[:cut], labels[cut:]
    values = _Values(rho, spec)

    def part(group: Sequence[str]) -> float:
        return values(Partition.singletons(group)) if len(group) > 1 else 0.0

    split = _p(x, y)
    full = Partition.singletons(labels)
    condition = values(split)
    whole = values(full)
    parts = part(x) + part(y)
    deviation = abs(whole - parts)
    margin, met = _conditional_margin(condition, deviation, settings, str(split))
    return Evaluation(
        margin,
        (str(full), str(split)),
        {"condition": condition, "whole": whole, "parts": parts, "gap": whole - parts, "condition_met": met},
    )


def ssa_margin_check(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    """min S(AB) + S(BC) - S(ABC) - S(B) over single parties, B in the middle."""

    entropies = MarginalEntropies(rho, spec.entropy)
    best: Optional[tuple[float, tuple[str, str, str]]] = None
    for a, b, c in itertools.permutations(rho.labels, 3):
        if a > c:
            continue
        margin = entropies((a, b)) + entropies((b, c)) - entropies((a, b, c)) - entropies((b,))
        if best is None or margin < best[0]:
            best = (margin, (a, b, c))
    if best is None:
        raise VerificationError("strong subadditivity needs three parties")
    a, b, c = best[1]
    return Evaluation(best[0], (f"{a}|{b}|{c}",), {"middle": b})


@dataclass(frozen=True)
class CheckDef:
    name: str
    evaluate: Evaluator
    conditional: bool = False

    def threshold(self, settings: VerifySettings) -> float:
        return 0.0 if self.conditional else settings.slack_threshold


def _complete_default(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    a, b, c = _three(rho, None)
    return complete_monogamy_margin(rho, spec, settings, finer=_p((a,), (b,), (c,)), coarser=_p((a,), (b,)), variant="complete")


def _tight_default(rho: DensityMatrix, spec: MqmiSpec, settings: VerifySettings) -> Evaluation:
    a, b, c = _three(rho, None)
    return complete_monogamy_margin(rho, spec, settings, finer=_p((a,), (b,), (c,)), coarser=_p((a,), (b, c)), variant="tight")


CHECKS: dict[str, CheckDef] = {
    "coarsening": CheckDef("coarsening", coarsening_margin),
    "coarsening-ab": CheckDef("coarsening-ab", lambda r, s, st: coarsening_margin(r, s, st, include_c=False)),
    "discorrelated": CheckDef("discorrelated", discorrelated_margin, conditional=True),
    "complete-monogamy": CheckDef("complete-monogamy", _complete_default, conditional=True),
    "tight-monogamy": CheckDef("tight-monogamy", _tight_default, conditional=True),
    "triangle": CheckDef("triangle", triangle_margin),
    "entropy-bound": CheckDef("entropy-bound", entropy_bound_margin),
    "nonnegative": CheckDef("nonnegative", nonnegative_margin),
    "symmetric": CheckDef("symmetric", symmetric_margin),
    "additivity": CheckDef("additivity", additivity_margin, conditional=True),
    "ssa": CheckDef("ssa", ssa_margin_check),
}


def get_check(name: str) -> CheckDef:
    try:
        return CHECKS[name]
    except KeyError as exc:
        raise VerificationError(f"unknown check {name!r}; expected one of {sorted(CHECKS)}") from exc


def verdict_for(check: CheckDef, margin: float, settings: VerifySettings) -> str:
    return PASS if margin >= check.threshold(settings) else COUNTEREXAMPLE


def single_report(
    check: CheckDef,
    rho: DensityMatrix,
    spec: MqmiSpec,
    evaluation: Evaluation,
    settings: VerifySettings,
) -> CheckReport:
    verdict = verdict_for(check, evaluation.margin, settings)
    witness = Witness(rho, evaluation.partitions, evaluation.margin) if verdict != PASS else None
    return CheckReport(
        check_id=check.name,
        spec=spec,
        samples=1,
        min_margin=evaluation.margin,
        verdict=verdict,
        witness=witness,
        details=dict(evaluation.details),
        provenance=provenance(settings),
    )


def _run(name: str, rho: DensityMatrix, spec: MqmiSpec, settings: Optional[VerifySettings], evaluate: Evaluator) -> CheckReport:
    settings = settings or verify_settings()
    check = get_check(name)
    return single_report(check, rho, spec, evaluate(rho, spec, settings), settings)


def check_coarsening_monotone(
    rho: DensityMatrix,
    spec: MqmiSpec,
    *,
    include_c: bool = True,
    settings: Optional[VerifySettings] = None,
) -> CheckReport:
    name = "coarsening" if include_c else "coarsening-ab"
    return _run(name, rho, spec, settings, lambda r, s, st: coarsening_margin(r, s, st, include_c=include_c))


def check_pair_monotone(
    rho: DensityMatrix,
    finer: Partition,
    coarser: Partition,
    spec: MqmiSpec,
    *,
    settings: Optional[VerifySettings] = None,
) -> CheckReport:
    """One explicit finer -> coarser pair; usable beyond the enumeration limit."""

    settings = settings or verify_settings()
    check = CheckDef("coarsening-pair", lambda r, s, st: pair_margin(r, s, st, finer=finer, coarser=coarser))
    return single_report(check, rho, spec, check.evaluate(rho, spec, settings), settings)


def check_discorrelated(
    rho: DensityMatrix,
    spec: MqmiSpec,
    tol: Optional[float] = None,
    *,
    parties: Optional[Sequence[str]] = None,
    settings: Optional[VerifySettings] = None,
) -> CheckReport:
    settings = _with_tolerance(settings or verify_settings(), tol)
    return _run("discorrelated", rho, spec, settings, lambda r, s, st: discorrelated_margin(r, s, st, parties=parties))


def check_complete_monogamy(
    rho: DensityMatrix,
    finer: Partition,
    coarser: Partition,
    spec: MqmiSpec,
    tol: Optional[float] = None,
    *,
    variant: str = "auto",
    settings: Optional[VerifySettings] = None,
) -> CheckReport:
    settings = _with_tolerance(settings or verify_settings(), tol)
    name = "tight-monogamy" if is_merge_coarsening(finer, coarser) else "complete-monogamy"
    return _run(
        name,
        rho,
        spec,
        settings,
        lambda r, s, st: complete_monogamy_margin(r, s, st, finer=finer, coarser=coarser, variant=variant),
    )


def check_triangle(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("triangle", rho, spec, settings, triangle_margin)


def check_entropy_bound(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("entropy-bound", rho, spec, settings, entropy_bound_margin)


def check_nonnegative(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("nonnegative", rho, spec, settings, nonnegative_margin)


def check_symmetric(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("symmetric", rho, spec, settings, symmetric_margin)


def check_additivity(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("additivity", rho, spec, settings, additivity_margin)


def check_ssa(rho: DensityMatrix, spec: MqmiSpec, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    return _run("ssa", rho, spec, settings, ssa_margin_check)


def _with_tolerance(settings: VerifySettings, tol: Optional[float]) -> VerifySettings:
    if tol is None:
        return settings
    if tol <= 0:
        raise VerificationError(f"tolerance must be positive, got {tol}")
    return replace(settings, equality_tolerance=tol)


__all__ = [
    "CHECKS",
    "CheckDef",
    "additivity_margin",
    "check_additivity",
    "check_complete_monogamy",
    "check_coarsening_monotone",
    "check_discorrelated",
    "check_entropy_bound",
    "check_nonnegative",
    "check_pair_monotone",
    "check_ssa",
    "check_symmetric",
    "check_triangle",
    "coarsening_margin",
    "complete_monogamy_margin",
    "discorrelated_margin",
    "entropy_bound_margin",
    "get_check",
    "move_margin",
    "nonnegative_margin",
    "pair_margin",
    "single_report",
    "ssa_margin_check",
    "symmetric_margin",
    "triangle_margin",
    "verdict_for",
]
