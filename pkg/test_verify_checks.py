import unittest

from config_loader import verify_settings
from mqmi import MqmiSpec
from partitions import Partition
from states import additivity_state, bell_product, classical_two_term, ghz_state, maximally_mixed, random_mixed, random_pure
from tensor_core import SubsystemLayout
from verify.checks import (
    CHECKS,
    check_additivity,
    check_coarsening_monotone,
    check_complete_monogamy,
    check_discorrelated,
    check_entropy_bound,
    check_nonnegative,
    check_pair_monotone,
    check_ssa,
    check_symmetric,
    check_triangle,
    get_check,
    move_margin,
)
from verify.report import COUNTEREXAMPLE, PASS, CheckReport, Evaluation, VerificationError

I = MqmiSpec("I")
IQ = MqmiSpec("Iq", 2.0)
IPRIME = MqmiSpec("Iprime")


def _p(text: str) -> Partition:
    return Partition.parse(text)


class InequalityCheckTest(unittest.TestCase):
    def test_ssa_tsallis_violation(self) -> None:
        rho = bell_product("AB", mixed="C")
        self.assertEqual(check_ssa(rho, I).verdict, PASS)
        report = check_ssa(rho, IQ)
        self.assertEqual(report.verdict, COUNTEREXAMPLE)
        self.assertAlmostEqual(report.min_margin, -0.25, places=12)
        self.assertIsNotNone(report.witness)

    def test_coarsening_type_c_breaks_iq(self) -> None:
        rho = bell_product("AB", mixed="C")
        self.assertEqual(check_coarsening_monotone(rho, I).verdict, PASS)
        self.assertEqual(check_coarsening_monotone(rho, IQ).verdict, COUNTEREXAMPLE)
        report = check_coarsening_monotone(rho, IQ, include_c=False)
        self.assertEqual(report.verdict, PASS)
        self.assertEqual(report.check_id, "coarsening-ab")
        self.assertLess(report.details["step_c"], 0.0)

    def test_single_c_move_margin(self) -> None:
        evaluation = move_margin(bell_product("AB", mixed="C"), IQ, verify_settings(), kinds="c")
        self.assertAlmostEqual(evaluation.margin, -0.25, places=12)

    def test_triangle(self) -> None:
        rho = bell_product("AD", mixed="B", zero="C", order="ABCD")
        self.assertEqual(check_triangle(rho, I).verdict, PASS)
        report = check_triangle(rho, IQ)
        self.assertEqual(report.verdict, COUNTEREXAMPLE)
        self.assertLessEqual(report.min_margin, -0.25 + 1e-12)
        self.assertEqual(check_triangle(ghz_state(3), I).verdict, PASS)

    def test_triangle_needs_three_or_four_parties(self) -> None:
        with self.assertRaises(VerificationError):
            check_triangle(bell_product("AB"), I)

    def test_nonnegative_and_symmetric(self) -> None:
        rho = random_mixed(SubsystemLayout.qubits(3), 4, 2)
        self.assertEqual(check_nonnegative(rho, I).verdict, PASS)
        report = check_symmetric(rho, IQ)
        self.assertEqual(report.verdict, PASS)
        self.assertLess(report.details["max_deviation"], 1e-9)

    def test_entropy_bound_on_pure_states(self) -> None:
        for spec in (I, IQ):
            report = check_entropy_bound(ghz_state(3), spec)
            self.assertEqual(report.verdict, PASS)
            self.assertTrue(report.details["pure"])
        with self.assertRaises(VerificationError):
            check_entropy_bound(ghz_state(3), MqmiSpec("Iprime"))


    def test_entropy_bound_on_mixed_states(self) -> None:
        for seed in range(100):
            rho = random_mixed(SubsystemLayout.qubits(3), 2 + seed % 7, seed)
            for spec in (I, IQ):
                with self.subTest(seed=seed, spec=str(spec)):
                    report = check_entropy_bound(rho, spec)
                    self.assertFalse(report.details["pure"])
                    self.assertGreaterEqual(report.min_margin, -1e-9)
                    self.assertEqual(report.verdict, PASS)

    def test_entropy_bound_of_maximally_mixed_qubits(self) -> None:
        rho = maximally_mixed(SubsystemLayout.qubits(3))
        self.assertAlmostEqual(check_entropy_bound(rho, I).min_margin, 3.0, places=12)
        self.assertAlmostEqual(check_entropy_bound(rho, IQ).min_margin, 1.5, places=12)

    def test_pair_monotone_beyond_enumeration_limit(self) -> None:
        chain = [_p("AB|CD|EF"), _p("AB|C|EF"), _p("AB|C|E")]
        for seed in range(5):
            rho = random_pure(SubsystemLayout.qubits(6), seed)
            with self.assertRaises(VerificationError):
                check_coarsening_monotone(rho, IPRIME)
            for finer, coarser in zip(chain, chain[1:]):
                report = check_pair_monotone(rho, finer, coarser, IPRIME)
                self.assertEqual(report.verdict, PASS)
                self.assertEqual(report.check_id, "coarsening-pair")
            whole = check_pair_monotone(rho, chain[0], chain[-1], IPRIME)
            self.assertEqual(len(whole.details["moves"]), 2)
            self.assertGreaterEqual(whole.details["step_min"], -1e-9)

    def test_pair_monotone_rejects_unordered_pairs(self) -> None:
        rho = random_pure(SubsystemLayout.qubits(4), 1)
        with self.assertRaises(VerificationError):
            check_pair_monotone(rho, _p("A|B"), _p("A|B|C"), I)
        with self.assertRaises(VerificationError):
            check_pair_monotone(rho, _p("A|B|C"), _p("AB|C"), MqmiSpec("Idprime"))


class ConditionalCheckTest(unittest.TestCase):
    def test_discorrelated(self) -> None:
        self.assertEqual(check_discorrelated(bell_product("AB", mixed="C"), I).verdict, PASS)
        report = check_discorrelated(classical_two_term(0.5), I)
        self.assertEqual(report.verdict, COUNTEREXAMPLE)
        self.assertTrue(report.details["condition_met"])
        self.assertAlmostEqual(report.details["value"], 1.0, places=9)
        self.assertEqual(check_discorrelated(classical_two_term(0.5), IQ).verdict, COUNTEREXAMPLE)

    def test_discorrelated_unmet_condition_passes(self) -> None:
        report = check_discorrelated(random_mixed(SubsystemLayout.qubits(3), 8, 4), I)
        self.assertEqual(report.verdict, PASS)
        self.assertFalse(report.details["condition_met"])

    def test_complete_and_tight_monogamy(self) -> None:
        rho = bell_product("AB", mixed="C")
        complete = check_complete_monogamy(rho, _p("A|B|C"), _p("A|B"), I)
        self.assertEqual(complete.check_id, "complete-monogamy")
        self.assertEqual(complete.verdict, PASS)
        self.assertEqual(complete.details["xi_size"], 2)
        tight = check_complete_monogamy(rho, _p("A|B|C"), _p("A|BC"), I)
        self.assertEqual(tight.check_id, "tight-monogamy")
        self.assertEqual(tight.verdict, PASS)
        broken = check_complete_monogamy(rho, _p("A|B|C"), _p("A|B"), IQ)
        self.assertEqual(broken.verdict, COUNTEREXAMPLE)
        self.assertAlmostEqual(broken.details["xi_max"], 0.25, places=12)

    def test_monogamy_preconditions(self) -> None:
        rho = bell_product("AB", mixed="C")
        with self.assertRaises(VerificationError):
            check_complete_monogamy(rho, _p("A|B|C"), _p("A|B"), I, variant="tight")
        with self.assertRaises(VerificationError):
            check_complete_monogamy(rho, _p("AB|C"), _p("A|C"), I)
        with self.assertRaises(VerificationError):
            check_discorrelated(rho, I, tol=0.0)
        with self.assertRaises(VerificationError):
            check_discorrelated(rho, MqmiSpec("Idprime"))

    def test_additivity(self) -> None:
        rho = additivity_state()
        self.assertEqual(check_additivity(rho, I).verdict, PASS)
        report = check_additivity(rho, MqmiSpec("Iqprime", 2.0))
        self.assertEqual(report.verdict, COUNTEREXAMPLE)
        self.assertAlmostEqual(report.details["gap"], -0.75, places=10)


class RegistryAndReportTest(unittest.TestCase):
    def test_every_check_is_registered(self) -> None:
        self.assertIn("coarsening", CHECKS)
        self.assertTrue(CHECKS["additivity"].conditional)
        self.assertFalse(CHECKS["triangle"].conditional)
        with self.assertRaises(VerificationError):
            get_check("bogus")

    def test_report_invariants(self) -> None:
        with self.assertRaises(VerificationError):
            Evaluation(float("nan"))
        with self.assertRaises(VerificationError):
            CheckReport("x", I, 1, -1.0, COUNTEREXAMPLE)
        with self.assertRaises(VerificationError):
            CheckReport("x", I, 1, 0.0, "maybe")

    def test_report_serialises(self) -> None:
        payload = check_ssa(bell_product("AB", mixed="C"), IQ).to_dict()
        self.assertEqual(payload["verdict"], COUNTEREXAMPLE)
        self.assertEqual(payload["spec"], {"kind": "Iq", "q": 2.0})
        self.assertEqual(payload["witness"]["state"]["parties"][0]["label"], "A")


if __name__ == "__main__":
    unittest.main()
