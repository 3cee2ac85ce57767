import unittest

import numpy as np

from states import (
    MarkovBlock,
    MarkovSpec,
    additivity_state,
    bell_product,
    classical_two_term,
    ghz_mixture,
    ghz_state,
    markov_demo_spec,
    markov_state,
    pair_product,
    pure_state,
    random_markov_spec,
    random_mixed,
    random_pure,
    relabel,
)
from entropy import ssa_margin
from tensor_core import SubsystemLayout, TensorError, validation_failures


class FixtureStateTest(unittest.TestCase):
    def test_ghz_mixture_spectrum(self) -> None:
        rho = ghz_mixture(0.5)
        np.testing.assert_allclose(rho.spectrum, [1 / 16] * 7 + [9 / 16], atol=1e-12)
        with self.assertRaises(TensorError):
            ghz_mixture(1.5)

    def test_classical_two_term(self) -> None:
        rho = classical_two_term(0.3)
        self.assertAlmostEqual(float(rho.matrix[0, 0].real), 0.3)
        self.assertAlmostEqual(float(rho.matrix[7, 7].real), 0.7)
        self.assertAlmostEqual(float(np.trace(rho.matrix).real), 1.0)

    def test_pure_state_normalises(self) -> None:
        rho = pure_state(np.array([1.0, 0.0, 0.0, 1.0]), SubsystemLayout.qubits(2))
        self.assertTrue(rho.is_pure())
        self.assertAlmostEqual(float(rho.matrix[0, 3].real), 0.5)
        with self.assertRaises(TensorError):
            pure_state(np.zeros(4), SubsystemLayout.qubits(2))
        with self.assertRaises(TensorError):
            pure_state(np.ones(3), SubsystemLayout.qubits(2))

    def test_additivity_state_marginals(self) -> None:
        rho = additivity_state()
        self.assertEqual(validation_failures(rho.matrix, 16), [])
        self.assertTrue(rho.marginal("AB").is_pure())
        np.testing.assert_allclose(rho.marginal("C").matrix, np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(rho.marginal("CD").matrix, np.eye(4) / 4, atol=1e-12)
        psi_plus = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
        np.testing.assert_allclose(rho.marginal("AB").matrix, np.outer(psi_plus, psi_plus), atol=1e-12)

    def test_bell_product_layout(self) -> None:
        rho = bell_product("AD", mixed="B", zero="C", order="ABCD")
        self.assertEqual(rho.labels, ("A", "B", "C", "D"))
        self.assertTrue(rho.marginal("AD").is_pure())
        np.testing.assert_allclose(rho.marginal("C").matrix, np.diag([1.0, 0.0]), atol=1e-12)
        np.testing.assert_allclose(rho.marginal("B").matrix, np.eye(2) / 2, atol=1e-12)
        self.assertEqual(bell_product("AB", mixed="C").labels, ("A", "B", "C"))

    def test_ghz_needs_two_parties(self) -> None:
        with self.assertRaises(TensorError):
            ghz_state(1)


class MarkovStateTest(unittest.TestCase):
    def test_demo_spec_layout(self) -> None:
        rho = markov_state(markov_demo_spec())
        self.assertEqual(rho.layout.dims, (2, 4, 2))
        self.assertEqual(validation_failures(rho.matrix, 16), [])

    def test_random_spec_is_valid(self) -> None:
        for seed in range(3):
            rho = markov_state(random_markov_spec(seed))
            self.assertEqual(validation_failures(rho.matrix, rho.dim), [])

    def test_random_spec_saturates_strong_subadditivity(self) -> None:
        for seed in range(100):
            rho = markov_state(random_markov_spec(seed))
            with self.subTest(seed=seed):
                self.assertLessEqual(abs(ssa_margin(rho, "A", "B", "C")), 1e-9)

    def test_wider_random_spec_saturates_strong_subadditivity(self) -> None:
        for seed in range(20):
            spec = random_markov_spec(seed, dim_a=3, dim_c=2, block_dims=((1, 1), (2, 2), (1, 3)))
            rho = markov_state(spec)
            with self.subTest(seed=seed):
                self.assertLessEqual(abs(ssa_margin(rho, "A", "B", "C")), 1e-9)

    def test_weights_must_sum_to_one(self) -> None:
        zero = np.diag([1.0, 0.0])
        with self.assertRaises(TensorError):
            MarkovSpec(
                blocks=(
                    MarkovBlock(0.5, left=zero, right=zero, left_dim=1, right_dim=1),
                    MarkovBlock(0.4, left=zero, right=zero, left_dim=1, right_dim=1),
                ),
                dim_a=2,
                dim_c=2,
            )

    def test_block_factor_shape_is_checked(self) -> None:
        zero = np.diag([1.0, 0.0])
        with self.assertRaises(TensorError):
            MarkovSpec(
                blocks=(MarkovBlock(1.0, left=zero, right=zero, left_dim=2, right_dim=1),),
                dim_a=2,
                dim_c=2,
            )


class RandomStateTest(unittest.TestCase):
    layout = SubsystemLayout.qubits(3)

    def test_seeded_draws_repeat(self) -> None:
        np.testing.assert_allclose(random_pure(self.layout, 5).matrix, random_pure(self.layout, 5).matrix)
        np.testing.assert_allclose(random_mixed(self.layout, 3, 5).matrix, random_mixed(self.layout, 3, 5).matrix)

    def test_random_mixed_rank(self) -> None:
        rho = random_mixed(self.layout, 3, 8)
        self.assertEqual(int(np.sum(rho.spectrum > 1e-10)), 3)
        with self.assertRaises(TensorError):
            random_mixed(self.layout, 0, 8)
        with self.assertRaises(TensorError):
            random_mixed(self.layout, 9, 8)

    def test_pair_product_keeps_layout(self) -> None:
        rho = pair_product(self.layout, 4)
        self.assertEqual(rho.labels, self.layout.labels)
        self.assertEqual(validation_failures(rho.matrix, 8), [])

    def test_relabel(self) -> None:
        rho = relabel(ghz_state(3), ["X", "Y", "Z"])
        self.assertEqual(rho.labels, ("X", "Y", "Z"))
        with self.assertRaises(TensorError):
            relabel(rho, ["X"])


if __name__ == "__main__":
    unittest.main()
