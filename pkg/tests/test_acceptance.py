from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from entropy import relative_entropy
from mqmi import MqmiSpec, mqmi
from partitions import Partition, all_partitions, xi_set
from states import additivity_state, classical_two_term, ghz_mixture, ghz_state, maximally_mixed, random_mixed, random_pure
from tensor_core import DensityMatrix, SubsystemLayout, kron, partial_trace, product_state
from verify.alpha import fit_alpha
from verify.checks import check_complete_monogamy, check_entropy_bound, check_pair_monotone
from verify.registry import IDPRIME_SCAN, XI_EXPECTED, additivity_gap_closed_form
from verify.report import COUNTEREXAMPLE, PASS, SweepConfig
from verify.search import search
from verify.sweep import run_sweep
from verify.table import BROKEN, NOT_APPLICABLE, build_table

QUBITS3 = SubsystemLayout.qubits(3)
QUBITS4 = SubsystemLayout.qubits(4)
QUBITS6 = SubsystemLayout.qubits(6)


def _sizes(smoke: int, full: int) -> list:
    return [smoke, pytest.param(full, marks=pytest.mark.slow)]


def _j(rho: DensityMatrix, text: str, kind: str, q: float | None = None) -> float:
    return mqmi(rho, Partition.parse(text), MqmiSpec.parse(kind, q)).value


def test_xi_set_matches_listed_partitions():
    got = {str(p) for p in xi_set(Partition.parse("A|B|CD|E"), Partition.parse("A|B"))}
    assert got == {str(Partition.parse(text)) for text in XI_EXPECTED}


def test_ghz_fixtures():
    ghz = ghz_state(3)
    assert abs(_j(ghz, "A|B|C", "I") - 3.0) <= 1e-9
    assert abs(_j(ghz, "A|B|C", "Iprime") - 3.0) <= 1e-9
    mixture = ghz_mixture(0.5)
    assert abs(_j(mixture, "A|B|C", "Idprime") + 0.21692) <= 1e-4
    scan = [_j(mixture, "A|B|C", "Iqdprime", q) for q in IDPRIME_SCAN]
    assert scan[0] < 0
    assert scan[-1] > 0


def test_additivity_gap_closed_form():
    rho = additivity_state()
    for q in (1.5, 2.0, 3.0):
        assert abs(_j(rho, "AB|CD", "Iqprime", q)) <= 1e-10
        gap = _j(rho, "A|B|C|D", "Iqprime", q) - _j(rho, "A|B", "Iq", q) - _j(rho, "C|D", "Iq", q)
        assert abs(gap - additivity_gap_closed_form(q)) <= 1e-10
    assert abs(additivity_gap_closed_form(2.0) + 0.75) <= 1e-10


@pytest.mark.parametrize("samples", _sizes(20, 500))
def test_von_neumann_kinds_are_monotone_on_four_qubits(samples):
    for ensemble, rank in (("haar-pure", None), ("hs-mixed", 4)):
        config = SweepConfig(ensemble, QUBITS4, samples=samples, seed=41, rank=rank)
        for kind in ("I", "Iprime"):
            report = run_sweep(config, ["coarsening"], MqmiSpec(kind))[0]
            assert report.verdict == PASS
            assert report.min_margin >= -1e-9


@pytest.mark.parametrize("samples", _sizes(20, 500))
def test_tsallis_mutual_information_monotone_without_party_drops(samples):
    for ensemble, rank in (("haar-pure", None), ("hs-mixed", 4)):
        config = SweepConfig(ensemble, QUBITS4, samples=samples, seed=43, rank=rank)
        report = run_sweep(config, ["coarsening-ab"], MqmiSpec("Iq", 2.0))[0]
        assert report.verdict == PASS
    witness = search("iq-type-c-increase", q=2.0, budget=4000, seed=5)
    assert witness.verdict == COUNTEREXAMPLE


@pytest.mark.parametrize("instances", _sizes(30, 100))
def test_complete_monogamy_on_product_families(instances):
    finer, coarser = Partition.parse("A|B|C"), Partition.parse("A|B")
    for seed in range(instances):
        rng = np.random.default_rng(seed)
        ab = random_mixed(SubsystemLayout.qubits("AB"), int(rng.integers(1, 5)), rng)
        c = random_mixed(SubsystemLayout.qubits("C"), int(rng.integers(1, 3)), rng)
        report = check_complete_monogamy(product_state(ab, c), finer, coarser, MqmiSpec("I"))
        assert report.verdict == PASS
        assert report.details["xi_max"] <= 1e-9


def test_classical_state_counterexamples():
    rho = classical_two_term(0.5)
    assert abs(_j(rho, "A|BC", "I") - 1.0) <= 1e-9
    assert abs(_j(rho, "A|B", "I") - 1.0) <= 1e-9
    assert abs(_j(rho, "A|C", "I") - 1.0) <= 1e-9
    assert abs(_j(rho, "A|B|C", "Iprime") - _j(rho, "A|B", "I")) <= 1e-9
    assert abs(_j(rho, "B|C", "I") - 1.0) <= 1e-9
    report = check_complete_monogamy(rho, Partition.parse("A|B|C"), Partition.parse("A|B"), MqmiSpec("Iprime"))
    assert report.verdict == COUNTEREXAMPLE


@pytest.mark.parametrize("samples", _sizes(100, 1000))
def test_pure_state_monogamy_exponent(samples):
    config = SweepConfig("haar-pure", QUBITS3, samples=samples, seed=47)
    for spec in (MqmiSpec("I"), MqmiSpec("Iq", 2.0)):
        report = fit_alpha(config, spec)
        assert report.verdict == PASS
        assert math.isfinite(report.alpha)
        assert report.min_margin >= -1e-9
        assert report.details["violations_at_half_alpha"] > 0
        assert report.details["certified"]


@pytest.mark.parametrize("samples3, samples4", [(50, 20), pytest.param(1000, 500, marks=pytest.mark.slow)])
def test_triangle_relations(samples3, samples4):
    report = run_sweep(SweepConfig("hs-mixed", QUBITS3, samples=samples3, seed=53), ["triangle"], MqmiSpec("I"))[0]
    assert report.min_margin >= -1e-9
    config4 = SweepConfig("hs-mixed", QUBITS4, samples=samples4, seed=59)
    for kind in ("I", "Iprime"):
        assert run_sweep(config4, ["triangle"], MqmiSpec(kind))[0].min_margin >= -1e-9
    assert search("iq-triangle-violation", q=2.0, budget=4000, seed=3).verdict == COUNTEREXAMPLE


@pytest.mark.parametrize("samples", _sizes(50, 1000))
def test_entropy_bound_is_tight_on_pure_states(samples):
    for seed in range(samples):
        rho = random_pure(QUBITS3, seed)
        for spec in (MqmiSpec("I"), MqmiSpec("Iq", 2.0)):
            report = check_entropy_bound(rho, spec)
            assert abs(report.details["gap"]) <= 1e-9


@pytest.mark.parametrize("samples", _sizes(100, 1000))
def test_entropy_bound_holds_on_mixed_states(samples):
    worst = {"I": math.inf, "Iq": math.inf}
    for seed in range(samples):
        rho = random_mixed(QUBITS3, 2 + seed % 7, seed)
        for spec in (MqmiSpec("I"), MqmiSpec("Iq", 2.0)):
            worst[spec.kind] = min(worst[spec.kind], check_entropy_bound(rho, spec).min_margin)
    assert min(worst.values()) >= -1e-9
    maximally_mixed_rho = maximally_mixed(QUBITS3)
    assert abs(check_entropy_bound(maximally_mixed_rho, MqmiSpec("I")).min_margin - 3.0) <= 1e-9


@pytest.mark.parametrize("samples", _sizes(20, 100))
def test_pair_coarsening_chain_on_six_qubits(samples):
    chain = [Partition.parse(text) for text in ("AB|CD|EF", "AB|C|EF", "AB|C|E")]
    for seed in range(samples):
        rho = random_pure(QUBITS6, seed)
        for finer, coarser in zip(chain, chain[1:]):
            report = check_pair_monotone(rho, finer, coarser, MqmiSpec("Iprime"))
            assert report.verdict == PASS
            assert report.min_margin >= -1e-9


@pytest.mark.parametrize("ssa_samples, pairs", [(200, 20), pytest.param(10_000, 100, marks=pytest.mark.slow)])
def test_entropy_layer(ssa_samples, pairs):
    config = SweepConfig("hs-mixed", QUBITS3, samples=ssa_samples, seed=61)
    assert run_sweep(config, ["ssa"], MqmiSpec("I"))[0].min_margin >= -1e-9
    assert search("tsallis-ssa-violation", q=2.0, budget=3000, seed=1).verdict == COUNTEREXAMPLE
    for seed in range(pairs):
        rho = random_mixed(QUBITS3, 8, seed)
        mutual = _j(rho, "A|B", "I")
        marginal = rho.marginal("AB")
        reference = DensityMatrix(marginal.layout, kron(rho.marginal("A").matrix, rho.marginal("B").matrix))
        assert abs(relative_entropy(marginal, reference) - mutual) <= 1e-9


@pytest.mark.parametrize("samples", _sizes(20, 100))
def test_partial_trace_matches_index_sum(samples):
    for seed in range(samples):
        rho = random_mixed(QUBITS3, 5, seed)
        tensor = rho.matrix.reshape(2, 2, 2, 2, 2, 2)
        expected = np.zeros((4, 4), dtype=complex)
        for a, c, a2, c2 in itertools.product(range(2), repeat=4):
            expected[2 * a + c, 2 * a2 + c2] = sum(tensor[a, b, c, a2, b, c2] for b in range(2))
        assert np.allclose(partial_trace(rho, ["A", "C"]).matrix, expected, atol=1e-12)


def test_kron_matches_element_formula():
    rng = np.random.default_rng(67)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    product = kron(a, b)
    for i, j, k, l in itertools.product(range(3), repeat=4):
        assert product[3 * i + k, 3 * j + l] == a[i, j] * b[k, l]


def test_partition_counts_follow_bell_numbers():
    bell = {1: 1, 2: 2, 3: 5, 4: 15, 5: 52}
    expected = sum(math.comb(5, k) * bell[k] for k in range(1, 6))
    assert len(all_partitions("ABCDE")) == expected


@pytest.mark.parametrize(
    "samples, budget", [(3, 25), pytest.param(None, None, marks=pytest.mark.slow)], ids=["smoke", "config-defaults"]
)
def test_table_regeneration(samples, budget):
    report = build_table(q=2.0, seed=1729, samples=samples, search_budget=budget)
    assert report.passed, [(c.row, c.column, c.mark) for c in report.unexpected]
    assert report.cell("Iq", "c").mark == BROKEN
    assert report.cell("Iprime", "CM").mark == BROKEN
    assert report.cell("Idprime", "a").mark == NOT_APPLICABLE
    assert all(report.cell("I", column).mark != BROKEN for column in ("a", "b", "c", "CM", "TCM", "TI"))
