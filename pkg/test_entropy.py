import math
import unittest

import numpy as np

from entropy import (
    VN,
    EntropyError,
    EntropySpec,
    MarginalEntropies,
    entropy,
    relative_entropy,
    spectral_entropy,
    ssa_margin,
    tsallis_entropy,
    von_neumann_entropy,
)
from states import basis_state, bell_product, classical_two_term, maximally_mixed, random_mixed
from tensor_core import DensityMatrix, SubsystemLayout, product_state


class EntropyValueTest(unittest.TestCase):
    qubit = SubsystemLayout.qubits(1)

    def test_maximally_mixed_qubit(self) -> None:
        rho = maximally_mixed(self.qubit)
        self.assertAlmostEqual(von_neumann_entropy(rho), 1.0, places=12)
        self.assertAlmostEqual(tsallis_entropy(rho, 2.0), 0.5, places=12)
        self.assertAlmostEqual(tsallis_entropy(rho, 3.0), 0.375, places=12)

    def test_pure_state_has_zero_entropy(self) -> None:
        rho = basis_state(0, self.qubit)
        self.assertEqual(von_neumann_entropy(rho), 0.0)
        self.assertAlmostEqual(tsallis_entropy(rho, 2.0), 0.0, places=12)

    def test_tsallis_tends_to_natural_log_entropy(self) -> None:
        rho = random_mixed(SubsystemLayout.qubits(2), 4, 3)
        self.assertAlmostEqual(tsallis_entropy(rho, 1.000001), von_neumann_entropy(rho) * math.log(2), places=5)

    def test_spectral_entropy_clamps_rounding(self) -> None:
        self.assertAlmostEqual(spectral_entropy(np.array([-1e-13, 0.5, 0.5])), 1.0, places=12)

    def test_entropy_dispatch(self) -> None:
        rho = classical_two_term(0.5)
        self.assertAlmostEqual(entropy(rho), 1.0, places=12)
        self.assertAlmostEqual(entropy(rho, EntropySpec.tsallis(2.0)), 0.5, places=12)


class EntropySpecTest(unittest.TestCase):
    def test_parameter_validation(self) -> None:
        with self.assertRaises(EntropyError):
            EntropySpec.tsallis(1.0)
        with self.assertRaises(EntropyError):
            EntropySpec.tsallis(-2.0)
        with self.assertRaises(EntropyError):
            EntropySpec(q=2.0)
        with self.assertRaises(EntropyError):
            EntropySpec("renyi", 2.0)

    def test_q_below_one_is_allowed_with_warning(self) -> None:
        with self.assertLogs("entropy", level="WARNING"):
            spec = EntropySpec.tsallis(0.5)
        self.assertTrue(spec.is_tsallis)


class RelativeEntropyTest(unittest.TestCase):
    qubit = SubsystemLayout.qubits(1)

    def test_known_values(self) -> None:
        zero = basis_state(0, self.qubit)
        mixed = maximally_mixed(self.qubit)
        self.assertAlmostEqual(relative_entropy(zero, mixed), 1.0, places=12)
        self.assertAlmostEqual(relative_entropy(mixed, mixed), 0.0, places=12)
        self.assertEqual(relative_entropy(mixed, zero), math.inf)

    def test_dimension_mismatch(self) -> None:
        with self.assertRaises(EntropyError):
            relative_entropy(maximally_mixed(self.qubit), maximally_mixed(SubsystemLayout.qubits(2)))


class SsaMarginTest(unittest.TestCase):
    def test_bell_times_mixed_qubit(self) -> None:
        rho = bell_product("AB", mixed="C")
        self.assertAlmostEqual(ssa_margin(rho, "A", "B", "C"), 0.0, places=12)
        self.assertAlmostEqual(ssa_margin(rho, "A", "B", "C", EntropySpec.tsallis(2.0)), -0.25, places=12)

    def test_rejects_overlapping_sets(self) -> None:
        rho = bell_product("AB", mixed="C")
        with self.assertRaises(EntropyError):
            ssa_margin(rho, "AB", "B", "C")
        with self.assertRaises(EntropyError):
            ssa_margin(rho, "", "B", "C")

    def test_marginal_cache(self) -> None:
        entropies = MarginalEntropies(classical_two_term(0.5), VN)
        self.assertEqual(entropies(()), 0.0)
        first = entropies("AB")
        self.assertEqual(entropies(("B", "A")), first)
        self.assertAlmostEqual(first, 1.0, places=12)


class EntropyPropertyTest(unittest.TestCase):
    specs = (VN, EntropySpec.tsallis(1.5), EntropySpec.tsallis(2.0), EntropySpec.tsallis(3.0))

    def test_von_neumann_is_additive_on_products(self) -> None:
        for seed in range(20):
            left = random_mixed(SubsystemLayout.qubits("AB"), 1 + seed % 4, seed)
            right = random_mixed(SubsystemLayout.parse("C:3"), 1 + seed % 3, 50 + seed)
            with self.subTest(seed=seed):
                self.assertAlmostEqual(
                    von_neumann_entropy(product_state(left, right)),
                    von_neumann_entropy(left) + von_neumann_entropy(right),
                    delta=1e-9,
                )

    def test_subadditivity(self) -> None:
        layout = SubsystemLayout.parse("A:2,B:3")
        for seed in range(50):
            rho = random_mixed(layout, 1 + seed % 6, seed)
            for spec in self.specs:
                with self.subTest(seed=seed, spec=str(spec)):
                    joint = entropy(rho, spec)
                    self.assertLessEqual(joint, entropy(rho.marginal("A"), spec) + entropy(rho.marginal("B"), spec) + 1e-9)

    def test_concavity(self) -> None:
        layout = SubsystemLayout.qubits(2)
        rng = np.random.default_rng(11)
        for trial in range(30):
            parts = [random_mixed(layout, int(rng.integers(1, 5)), rng) for _ in range(3)]
            weights = rng.dirichlet(np.ones(3))
            mixture = DensityMatrix(layout, sum(w * part.matrix for w, part in zip(weights, parts)))
            for spec in self.specs:
                with self.subTest(trial=trial, spec=str(spec)):
                    average = sum(w * entropy(part, spec) for w, part in zip(weights, parts))
                    self.assertGreaterEqual(entropy(mixture, spec), average - 1e-9)

    def test_tsallis_two_matches_direct_trace(self) -> None:
        for seed in range(20):
            rho = random_mixed(SubsystemLayout.qubits(3), 1 + seed % 8, seed)
            direct = 1.0 - float(np.trace(rho.matrix @ rho.matrix).real)
            with self.subTest(seed=seed):
                self.assertAlmostEqual(tsallis_entropy(rho, 2.0), direct, delta=1e-12)

if __name__ == "__main__":
    unittest.main()
