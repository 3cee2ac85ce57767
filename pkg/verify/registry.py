"""Registered counterexample and conformance cases.

Each case builds an exact state, evaluates the quantities it is about and
compares them with closed-form expectations. A case whose expectations all
hold reports its registered verdict; any mismatch reports ``fail``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from config_loader import VerifySettings, verify_settings
from entropy import VN, EntropySpec, MarginalEntropies, ssa_margin, von_neumann_entropy
from mqmi import MqmiSpec, mqmi
from partitions import Partition, xi_set
from states import (
    MarkovBlock,
    MarkovSpec,
    additivity_state,
    bell_product,
    classical_two_term,
    ghz_mixture,
    markov_demo_spec,
    markov_state,
)
from tensor_core import DensityMatrix

from .checks import (
    check_coarsening_monotone,
    check_complete_monogamy,
    check_discorrelated,
    check_ssa,
    check_triangle,
)
from .report import COUNTEREXAMPLE, FAIL, PASS, CheckReport, VerificationError, Witness, provenance

logger = logging.getLogger(__name__)

IDPRIME_SCAN = (1.01, 1.05) + tuple(round(1.1 + 0.1 * k, 2) for k in range(20))
ADDITIVITY_QS = (1.5, 2.0, 3.0)
XI_FINER = "A|B|CD|E"
XI_COARSER = "A|B"
XI_EXPECTED = (
    "CD|E", "A|CD|E", "B|CD|E", "A|CD", "B|CD", "B|C|E", "B|D|E", "A|D|E", "A|C|E",
    "A|E", "B|E", "A|C", "A|D", "B|C", "B|D", "C|E", "D|E",
)


@dataclass(frozen=True)
class Expectation:
    name: str
    observed: Any
    expected: Any
    tolerance: Optional[float] = None
    relation: str = "eq"

    @property
    def margin(self) -> float:
        if self.tolerance is None and self.relation == "eq":
            return 0.0 if self.observed == self.expected else -1.0
        observed, expected = float(self.observed), float(self.expected)
        if self.relation == "gt":
            return observed - expected
        if self.relation == "lt":
            return expected - observed
        return float(self.tolerance) - abs(observed - expected)  # type: ignore[arg-type]

    @property
    def matched(self) -> bool:
        if self.relation in ("gt", "lt"):
            return self.margin > 0.0
        return self.margin >= 0.0

    def to_dict(self) -> dict[str, Any]:
        def plain(value: Any) -> Any:
            return list(value) if isinstance(value, tuple) else value

        return {
            "name": self.name,
            "observed": plain(self.observed),
            "expected": plain(self.expected),
            "tolerance": self.tolerance,
            "relation": self.relation,
            "matched": self.matched,
        }


@dataclass(frozen=True, eq=False)
class CaseOutcome:
    state: Optional[DensityMatrix]
    partitions: tuple[str, ...]
    expectations: tuple[Expectation, ...]
    details: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Case:
    case_id: str
    description: str
    expected_verdict: str
    build: Callable[[VerifySettings], CaseOutcome]
    kind: Optional[str] = None
    q: Optional[float] = None

    @property
    def spec(self) -> Optional[MqmiSpec]:
        return MqmiSpec.parse(self.kind, self.q) if self.kind else None


def _j(rho: DensityMatrix, text: str, kind: str, q: Optional[float] = None) -> float:
    return mqmi(rho, Partition.parse(text), MqmiSpec.parse(kind, q)).value


def _h(p: float) -> float:
    return float(-sum(x * math.log2(x) for x in (p, 1.0 - p) if x > 0))


def _ghz_idprime(settings: VerifySettings) -> CaseOutcome:
    rho = ghz_mixture(0.5)
    full = "A|B|C"
    # spectra: whole {9/16, 1/16 x7}, pairs {3/8, 3/8, 1/8, 1/8}, singles {1/2, 1/2}
    s_whole = -(9 / 16) * math.log2(9 / 16) - (7 / 16) * math.log2(1 / 16)
    s_pair = -2 * (3 / 8) * math.log2(3 / 8) - 2 * (1 / 8) * math.log2(1 / 8)
    closed = 3.0 - 3.0 * s_pair + s_whole
    idprime = _j(rho, full, "Idprime")
    scan = {q: _j(rho, full, "Iqdprime", q) for q in IDPRIME_SCAN}
    negative = [q for q, value in scan.items() if value < 0]
    crossing = next((q for q, value in scan.items() if value >= 0), None)
    if scan[2.0] > 0:
        logger.warning(
            "[repro] ghz-idprime I''_q at q=2 is %+.5f; negativity holds only for q in %s",
            scan[2.0],
            f"[{negative[0]}, {negative[-1]}]" if negative else "[]",
        )
    return CaseOutcome(
        rho,
        (full,),
        (
            Expectation("S(rho)", von_neumann_entropy(rho), s_whole, 1e-9),
            Expectation("I''(A:B:C)", idprime, closed, 1e-9),
            Expectation("I''(A:B:C) rounded", idprime, -0.21692, 1e-4),
            Expectation("I''_2(A:B:C)", scan[2.0], 0.09375, 1e-10),
            Expectation(f"I''_q(q={IDPRIME_SCAN[0]}) < 0", scan[IDPRIME_SCAN[0]], 0.0, relation="lt"),
        ),
        {
            "scan": {f"{q:g}": value for q, value in scan.items()},
            "negative_qs": negative,
            "first_nonnegative_q": crossing,
        },
    )


def additivity_gap_closed_form(q: float) -> float:
    return 2.0 * (2 ** (1 - q) + 4 ** (1 - q) - 8 ** (1 - q) - 1.0) / (q - 1.0)


def additivity_gap_as_printed(q: float) -> float:
    return (2 ** (1 - q) - 1.0) * (1.0 - 4 ** (1 - q))


def _iqprime_additivity(settings: VerifySettings) -> CaseOutcome:
    rho = additivity_state()
    expectations = []
    gaps = {}
    for q in ADDITIVITY_QS:
        split = _j(rho, "AB|CD", "Iqprime", q)
        gap = _j(rho, "A|B|C|D", "Iqprime", q) - _j(rho, "A|B", "Iq", q) - _j(rho, "C|D", "Iq", q)
        gaps[f"{q:g}"] = gap
        expectations.append(Expectation(f"Iq'(AB:CD) q={q:g}", split, 0.0, 1e-10))
        expectations.append(Expectation(f"gap q={q:g}", gap, additivity_gap_closed_form(q), 1e-10))
        printed = additivity_gap_as_printed(q)
        if not math.isclose(printed, gap, abs_tol=1e-10):
            logger.warning(
                "[repro] iqprime-additivity q=%g gap=%+.6f printed_form=%+.6f (sign/factor discrepancy)", q, gap, printed
            )
    expectations.append(Expectation("gap q=2", gaps["2"], -0.75, 1e-10))
    return CaseOutcome(
        rho,
        ("A|B|C|D", "AB|CD"),
        tuple(expectations),
        {"gaps": gaps, "printed_form": {f"{q:g}": additivity_gap_as_printed(q) for q in ADDITIVITY_QS}},
    )


def _cheng_state(settings: VerifySettings) -> CaseOutcome:
    rho = classical_two_term(0.5)
    spec = EntropySpec.tsallis(2.0)
    s = MarginalEntropies(rho, spec)
    ssa = ssa_margin(rho, "A", "B", "C", spec, entropies=s)
    subadditivity_gap = s("A") + s("C") - s("AC")
    report = check_discorrelated(rho, MqmiSpec("Iq", 2.0), settings=settings)
    return CaseOutcome(
        rho,
        ("A|BC", "A|B", "A|C"),
        (
            Expectation("S2(AB)+S2(BC)-S2(ABC)-S2(B)", ssa, 0.0, 1e-12),
            Expectation("S2(A)+S2(C)-S2(AC)", subadditivity_gap, 0.5, 1e-12),
            Expectation("Iq dis-correlated verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _markov_i(settings: VerifySettings) -> CaseOutcome:
    rho = markov_state(markov_demo_spec())
    ssa = ssa_margin(rho, "A", "B", "C", VN)
    condition = _j(rho, "A|BC", "I") - _j(rho, "A|B", "I")
    value = _j(rho, "A|C", "I")
    report = check_discorrelated(rho, MqmiSpec("I"), settings=settings)
    return CaseOutcome(
        rho,
        ("A|BC", "A|B", "A|C"),
        (
            Expectation("SSA margin", ssa, 0.0, 1e-9),
            Expectation("I(A:BC)-I(A:B)", condition, 0.0, 1e-9),
            Expectation("I(A:C) > 1e-6", value, 1e-6, relation="gt"),
            Expectation("I(A:C)", value, 2 * _h(0.25) - 1.5, 1e-9),
            Expectation("I dis-correlated verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def two_block_classical_markov(p: float = 0.3) -> DensityMatrix:
    """p |000> + (1 - p) |111> assembled as a two-block Markov state."""

    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    spec = MarkovSpec(
        blocks=(
            MarkovBlock(p, left=zero, right=zero, left_dim=1, right_dim=1),
            MarkovBlock(1.0 - p, left=one, right=one, left_dim=1, right_dim=1),
        ),
        dim_a=2,
        dim_c=2,
    )
    return markov_state(spec)


def _markov_iprime(settings: VerifySettings) -> CaseOutcome:
    p = 0.3
    rho = two_block_classical_markov(p)
    report = check_complete_monogamy(rho, Partition.parse("A|B|C"), Partition.parse("A|B"), MqmiSpec("Iprime"), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|C", "A|B", "A|C", "B|C"),
        (
            Expectation("SSA margin", ssa_margin(rho, "A", "B", "C"), 0.0, 1e-9),
            Expectation("I'(A:B:C)-I(A:B)", _j(rho, "A|B|C", "Iprime") - _j(rho, "A|B", "I"), 0.0, 1e-9),
            Expectation("I(A:C)", _j(rho, "A|C", "I"), _h(p), 1e-9),
            Expectation("I(B:C)", _j(rho, "B|C", "I"), _h(p), 1e-9),
            Expectation("I' complete-monogamy verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _xi_example(settings: VerifySettings) -> CaseOutcome:
    finer = Partition.parse(XI_FINER)
    coarser = Partition.parse(XI_COARSER)
    observed = tuple(sorted(str(p) for p in xi_set(finer, coarser)))
    expected = tuple(sorted(str(Partition.parse(text)) for text in XI_EXPECTED))
    missing = sorted(set(expected) - set(observed))
    extra = sorted(set(observed) - set(expected))
    return CaseOutcome(
        None,
        (XI_FINER, XI_COARSER),
        (
            Expectation("size", len(observed), 17),
            Expectation("xi set", observed, expected),
        ),
        {"missing": missing, "extra": extra},
    )


def _classical_monogamy(settings: VerifySettings) -> CaseOutcome:
    rho = classical_two_term(0.5)
    report_i = check_discorrelated(rho, MqmiSpec("I"), settings=settings)
    report_q = check_discorrelated(rho, MqmiSpec("Iq", 2.0), settings=settings)
    return CaseOutcome(
        rho,
        ("A|BC", "A|B", "A|C"),
        (
            Expectation("I(A:BC)", _j(rho, "A|BC", "I"), 1.0, 1e-9),
            Expectation("I(A:B)", _j(rho, "A|B", "I"), 1.0, 1e-9),
            Expectation("I(A:C)", _j(rho, "A|C", "I"), 1.0, 1e-9),
            Expectation("Iq(A:C)", _j(rho, "A|C", "Iq", 2.0), 0.5, 1e-9),
            Expectation("I verdict", report_i.verdict, COUNTEREXAMPLE),
            Expectation("Iq verdict", report_q.verdict, COUNTEREXAMPLE),
        ),
    )


def _iprime_complete(settings: VerifySettings) -> CaseOutcome:
    rho = classical_two_term(0.5)
    report = check_complete_monogamy(rho, Partition.parse("A|B|C"), Partition.parse("A|B"), MqmiSpec("Iprime"), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|C", "A|B", "A|C"),
        (
            Expectation("I'(A:B:C)", _j(rho, "A|B|C", "Iprime"), 1.0, 1e-9),
            Expectation("I(A:B)", _j(rho, "A|B", "I"), 1.0, 1e-9),
            Expectation("I(A:C)", _j(rho, "A|C", "I"), 1.0, 1e-9),
            Expectation("verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _iprime_tight(settings: VerifySettings) -> CaseOutcome:
    rho = classical_two_term(0.5)
    report = check_complete_monogamy(
        rho, Partition.parse("A|B|C"), Partition.parse("A|BC"), MqmiSpec("Iprime"), variant="tight", settings=settings
    )
    return CaseOutcome(
        rho,
        ("A|B|C", "A|BC", "B|C"),
        (
            Expectation("I'(A:B:C)", _j(rho, "A|B|C", "Iprime"), 1.0, 1e-9),
            Expectation("I(A:BC)", _j(rho, "A|BC", "I"), 1.0, 1e-9),
            Expectation("I(B:C)", _j(rho, "B|C", "I"), 1.0, 1e-9),
            Expectation("verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _tsallis_ssa(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AB", mixed="C")
    spec = EntropySpec.tsallis(2.0)
    report = check_ssa(rho, MqmiSpec("Iq", 2.0), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|C",),
        (
            Expectation("S2 SSA margin (A,B,C)", ssa_margin(rho, "A", "B", "C", spec), -0.25, 1e-12),
            Expectation("von Neumann SSA margin (A,B,C)", ssa_margin(rho, "A", "B", "C", VN), 0.0, 1e-9),
            Expectation("verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _iq_type_c(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AB", mixed="C")
    spec = MqmiSpec("Iq", 2.0)
    with_c = check_coarsening_monotone(rho, spec, settings=settings)
    without_c = check_coarsening_monotone(rho, spec, include_c=False, settings=settings)
    return CaseOutcome(
        rho,
        ("A|BC", "A|B"),
        (
            Expectation("Iq(A:BC)", _j(rho, "A|BC", "Iq", 2.0), 0.75, 1e-12),
            Expectation("Iq(A:B)", _j(rho, "A|B", "Iq", 2.0), 1.0, 1e-12),
            Expectation("verdict with type-c pairs", with_c.verdict, COUNTEREXAMPLE),
            Expectation("verdict on a/b pairs", without_c.verdict, PASS),
        ),
    )


def _iq_triangle(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AD", mixed="B", zero="C", order="ABCD")
    lhs = _j(rho, "A|B|CD", "Iq", 2.0)
    rhs1 = _j(rho, "A|BD|C", "Iq", 2.0)
    rhs2 = _j(rho, "AD|B|C", "Iq", 2.0)
    report_q = check_triangle(rho, MqmiSpec("Iq", 2.0), settings=settings)
    report_vn = check_triangle(rho, MqmiSpec("I"), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|CD", "A|BD|C", "AD|B|C"),
        (
            Expectation("Iq(A:B:CD)", lhs, 1.0, 1e-12),
            Expectation("Iq(A:BD:C)", rhs1, 0.75, 1e-12),
            Expectation("Iq(AD:B:C)", rhs2, 0.0, 1e-12),
            Expectation("slack", rhs1 + rhs2 - lhs, -0.25, 1e-12),
            Expectation("Iq verdict", report_q.verdict, COUNTEREXAMPLE),
            Expectation("I verdict", report_vn.verdict, PASS),
        ),
    )


def _iq_complete(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AB", mixed="C")
    report = check_complete_monogamy(rho, Partition.parse("A|B|C"), Partition.parse("A|B"), MqmiSpec("Iq", 2.0), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|C", "A|B", "A|C"),
        (
            Expectation("Iq(A:B:C)", _j(rho, "A|B|C", "Iq", 2.0), 1.0, 1e-12),
            Expectation("Iq(A:B)", _j(rho, "A|B", "Iq", 2.0), 1.0, 1e-12),
            Expectation("Iq(A:C)", _j(rho, "A|C", "Iq", 2.0), 0.25, 1e-12),
            Expectation("verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


def _iqprime_discard(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AB", mixed="C")
    finer = _j(rho, "A|B|C", "Iqprime", 2.0)
    coarser = _j(rho, "A|B", "Iqprime", 2.0)
    return CaseOutcome(
        rho,
        ("A|B|C", "A|B"),
        (
            Expectation("Iq'(A:B:C)", finer, 0.5, 1e-12),
            Expectation("Iq'(A:B)", coarser, 1.0, 1e-12),
            Expectation("finer - coarser", finer - coarser, -0.5, 1e-12),
        ),
    )


def _iqprime_merge(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AC", mixed="B", order="ABC")
    finer = _j(rho, "A|B|C", "Iqprime", 2.0)
    coarser = _j(rho, "AB|C", "Iqprime", 2.0)
    return CaseOutcome(
        rho,
        ("A|B|C", "AB|C"),
        (
            Expectation("Iq'(A:B:C)", finer, 0.5, 1e-12),
            Expectation("Iq'(AB:C)", coarser, 0.75, 1e-12),
            Expectation("finer - coarser", finer - coarser, -0.25, 1e-12),
        ),
    )


def _iqprime_triangle(settings: VerifySettings) -> CaseOutcome:
    rho = bell_product("AD", mixed="C", zero="B", order="ABCD")
    lhs = _j(rho, "A|B|CD", "Iqprime", 2.0)
    rhs1 = _j(rho, "A|BD|C", "Iqprime", 2.0)
    rhs2 = _j(rho, "AD|B|C", "Iqprime", 2.0)
    report = check_triangle(rho, MqmiSpec("Iqprime", 2.0), settings=settings)
    return CaseOutcome(
        rho,
        ("A|B|CD", "A|BD|C", "AD|B|C"),
        (
            Expectation("Iq'(A:B:CD)", lhs, 0.75, 1e-12),
            Expectation("Iq'(A:BD:C)", rhs1, 0.5, 1e-12),
            Expectation("Iq'(AD:B:C)", rhs2, 0.0, 1e-12),
            Expectation("slack", rhs1 + rhs2 - lhs, -0.25, 1e-12),
            Expectation("verdict", report.verdict, COUNTEREXAMPLE),
        ),
    )


CASES: dict[str, Case] = {
    case.case_id: case
    for case in (
        Case("ghz-idprime", "I'' is negative on 1/2 GHZ + I/16; I''_q scanned over q", COUNTEREXAMPLE, _ghz_idprime, "Idprime"),
        Case("iqprime-additivity", "Iq' is not additive on the Bell (x) I/4 state", COUNTEREXAMPLE, _iqprime_additivity, "Iqprime", 2.0),
        Case("cheng-state", "S_q SSA saturated while S_q(A)+S_q(C) > S_q(AC)", COUNTEREXAMPLE, _cheng_state, "Iq", 2.0),
        Case("markov-I", "Markov state with I(A:BC) = I(A:B) and I(A:C) > 0", COUNTEREXAMPLE, _markov_i, "I"),
        Case("markov-Iprime", "classical Markov state: I'(A:B:C) = I(A:B) with I(A:C) = I(B:C) = h(p)", COUNTEREXAMPLE, _markov_iprime, "Iprime"),
        Case("xi-example", "Xi(A|B|CD|E - A|B) equals the 17-element list", PASS, _xi_example),
        Case("classical-monogamy", "I and Iq fail the dis-correlated condition on a classical state", COUNTEREXAMPLE, _classical_monogamy, "I"),
        Case("iprime-complete", "I' is not completely monogamous", COUNTEREXAMPLE, _iprime_complete, "Iprime"),
        Case("iprime-tight", "I' is not tightly completely monogamous", COUNTEREXAMPLE, _iprime_tight, "Iprime"),
        Case("tsallis-ssa", "S_2 violates strong subadditivity on Bell (x) I/2", COUNTEREXAMPLE, _tsallis_ssa, "Iq", 2.0),
        Case("iq-type-c", "Iq increases under a party drop", COUNTEREXAMPLE, _iq_type_c, "Iq", 2.0),
        Case("iq-triangle", "Iq breaks I(A:B:CD) <= I(A:BD:C) + I(AD:B:C)", COUNTEREXAMPLE, _iq_triangle, "Iq", 2.0),
        Case("iq-complete", "Iq(A:B:C) = Iq(A:B) with Iq(A:C) = 1/4", COUNTEREXAMPLE, _iq_complete, "Iq", 2.0),
        Case("iqprime-discard", "Iq' increases when a block is discarded", COUNTEREXAMPLE, _iqprime_discard, "Iqprime", 2.0),
        Case("iqprime-merge", "Iq' increases when two blocks merge", COUNTEREXAMPLE, _iqprime_merge, "Iqprime", 2.0),
        Case("iqprime-triangle", "Iq' breaks the three-block triangle relation", COUNTEREXAMPLE, _iqprime_triangle, "Iqprime", 2.0),
    )
}

REQUIRED_CASES = ("ghz-idprime", "iqprime-additivity", "cheng-state", "markov-I", "markov-Iprime", "xi-example")


def get_case(case_id: str) -> Case:
    try:
        return CASES[case_id]
    except KeyError as exc:
        raise VerificationError(f"unknown case {case_id!r}; expected one of {sorted(CASES)}") from exc


def reproduce_counterexample(case_id: str, *, settings: Optional[VerifySettings] = None) -> CheckReport:
    settings = settings or verify_settings()
    case = get_case(case_id)
    outcome = case.build(settings)
    failed = [e.name for e in outcome.expectations if not e.matched]
    verdict = case.expected_verdict if not failed else FAIL
    min_margin = min(e.margin for e in outcome.expectations)
    witness = None
    if verdict != PASS:
        note = case.description if not failed else "mismatch: " + ", ".join(failed)
        witness = Witness(outcome.state, outcome.partitions, min_margin, note)
    if failed:
        logger.warning("[repro] case=%s mismatched=%s", case_id, ",".join(failed))
    else:
        logger.info("[repro] case=%s verdict=%s", case_id, verdict)
    return CheckReport(
        check_id=f"repro:{case_id}",
        spec=case.spec,
        samples=1,
        min_margin=min_margin,
        verdict=verdict,
        witness=witness,
        details={
            "description": case.description,
            "expected_verdict": case.expected_verdict,
            "expectations": [e.to_dict() for e in outcome.expectations],
            **outcome.details,
        },
        provenance=provenance(settings),
    )


def expected_outcome(report: CheckReport) -> bool:
    """True when a repro report carries its case's registered verdict."""

    case_id = report.check_id.partition(":")[2]
    return report.verdict == get_case(case_id).expected_verdict


__all__ = [
    "ADDITIVITY_QS",
    "CASES",
    "Case",
    "CaseOutcome",
    "Expectation",
    "IDPRIME_SCAN",
    "REQUIRED_CASES",
    "XI_EXPECTED",
    "additivity_gap_as_printed",
    "additivity_gap_closed_form",
    "expected_outcome",
    "get_case",
    "reproduce_counterexample",
    "two_block_classical_markov",
]
