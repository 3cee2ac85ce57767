"""Constructors for the fixture states and the random ensembles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from tensor_core import (
    DensityMatrix,
    SubsystemLayout,
    TensorError,
    kron,
    permute_parties,
    product_state,
    validation_failures,
)

Seed = Union[int, np.random.SeedSequence, np.random.Generator]

_LABELS = "ABCDEFGHIJ"


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise TensorError(f"{name} must lie in [0, 1], got {p}")
    return p


def _check_parties(n: int) -> int:
    if int(n) != n or n < 2:
        raise TensorError(f"need at least 2 parties, got {n!r}")
    return int(n)


def pure_state(vector: np.ndarray, layout: SubsystemLayout) -> DensityMatrix:
    vector = np.asarray(vector, dtype=complex).reshape(-1)
    if vector.size != layout.total_dim:
        raise TensorError(f"vector length {vector.size} does not match layout dimension {layout.total_dim}")
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise TensorError("cannot build a pure state from the zero vector")
    vector = vector / norm
    return DensityMatrix(layout, np.outer(vector, vector.conj()))


def ghz_state(n: int = 3) -> DensityMatrix:
    n = _check_parties(n)
    layout = SubsystemLayout.qubits(n)
    vector = np.zeros(layout.total_dim, dtype=complex)
    vector[0] = vector[-1] = 1.0
    return pure_state(vector, layout)


def bell_state(labels: str = "AB") -> DensityMatrix:
    """(|00> + |11>)/sqrt(2) on two qubits."""

    vector = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)
    return pure_state(vector, SubsystemLayout.qubits(labels))


def basis_state(index: int, layout: SubsystemLayout) -> DensityMatrix:
    vector = np.zeros(layout.total_dim, dtype=complex)
    vector[index] = 1.0
    return DensityMatrix(layout, np.outer(vector, vector))


def maximally_mixed(layout: SubsystemLayout) -> DensityMatrix:
    return DensityMatrix(layout, np.eye(layout.total_dim) / layout.total_dim)


def bell_product(pair: str, *, mixed: str = "", zero: str = "", order: Sequence[str] | None = None) -> DensityMatrix:
    """Bell pair on ``pair`` times I/2 on each ``mixed`` qubit and |0> on each ``zero`` qubit."""

    factors = [bell_state(pair)]
    factors += [maximally_mixed(SubsystemLayout.qubits(label)) for label in mixed]
    factors += [basis_state(0, SubsystemLayout.qubits(label)) for label in zero]
    rho = product_state(*factors)
    return permute_parties(rho, tuple(order) if order is not None else tuple(sorted(rho.labels)))


def ghz_mixture(p: float, n: int = 3) -> DensityMatrix:
    """p |GHZ_n><GHZ_n| + (1 - p) I / 2^n."""

    p = _check_probability(p, "visibility")
    ghz = ghz_state(n)
    mixed = maximally_mixed(ghz.layout)
    return DensityMatrix(ghz.layout, p * ghz.matrix + (1.0 - p) * mixed.matrix)


def classical_two_term(p: float, n: int = 3) -> DensityMatrix:
    """p |0...0><0...0| + (1 - p) |1...1><1...1|."""

    p = _check_probability(p)
    layout = SubsystemLayout.qubits(_check_parties(n))
    diagonal = np.zeros(layout.total_dim)
    diagonal[0] = p
    diagonal[-1] += 1.0 - p
    return DensityMatrix(layout, np.diag(diagonal))


def additivity_state() -> DensityMatrix:
    """|Psi+><Psi+|_AB (x) I/2_C (x) I/2_D, written out as the explicit 8x8 rho^ABC."""

    rho_abc = np.zeros((8, 8), dtype=complex)
    for row, col in [(2, 2), (2, 4), (3, 3), (3, 5), (4, 2), (4, 4), (5, 3), (5, 5)]:
        rho_abc[row, col] = 0.25
    rho_d = np.eye(2) / 2.0
    return DensityMatrix(SubsystemLayout.qubits(4), kron(rho_abc, rho_d))


@dataclass(frozen=True)
class MarkovBlock:
    """One summand q_j rho^{A B_j^L} (x) rho^{B_j^R C} of a Markov state."""

    weight: float
    left: np.ndarray
    right: np.ndarray
    left_dim: int
    right_dim: int

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise TensorError(f"block weight must be nonnegative, got {self.weight}")
        if self.left_dim < 1 or self.right_dim < 1:
            raise TensorError("block dimensions must be positive")
        for name, factor in (("left", self.left), ("right", self.right)):
            array = np.asarray(factor, dtype=complex)
            failures = validation_failures(array, array.shape[0]) if array.ndim == 2 else ["not a matrix"]
            if failures:
                raise TensorError(f"{name} factor is not a density matrix: {'; '.join(failures)}")
        object.__setattr__(self, "left", np.asarray(self.left, dtype=complex))
        object.__setattr__(self, "right", np.asarray(self.right, dtype=complex))

    @property
    def middle_dim(self) -> int:
        return self.left_dim * self.right_dim


@dataclass(frozen=True)
class MarkovSpec:
    blocks: tuple[MarkovBlock, ...]
    dim_a: int
    dim_c: int
    labels: tuple[str, str, str] = ("A", "B", "C")

    def __post_init__(self) -> None:
        if not self.blocks:
            raise TensorError("a Markov spec needs at least one block")
        total = sum(block.weight for block in self.blocks)
        if abs(total - 1.0) > 1e-12:
            raise TensorError(f"block weights must sum to 1, got {total}")
        for j, block in enumerate(self.blocks):
            if block.left.shape[0] != self.dim_a * block.left_dim:
                raise TensorError(
                    f"block {j}: left factor has side {block.left.shape[0]}, "
                    f"expected dim(A) * dim(B_L) = {self.dim_a * block.left_dim}"
                )
            if block.right.shape[0] != block.right_dim * self.dim_c:
                raise TensorError(
                    f"block {j}: right factor has side {block.right.shape[0]}, "
                    f"expected dim(B_R) * dim(C) = {block.right_dim * self.dim_c}"
                )
        if self.dim_b < 2:
            raise TensorError("the middle system needs total dimension >= 2")

    @property
    def dim_b(self) -> int:
        return sum(block.middle_dim for block in self.blocks)


def markov_state(spec: MarkovSpec) -> DensityMatrix:
    """Direct sum over j of q_j rho^{A B_j^L} (x) rho^{B_j^R C}, B block-diagonal."""

    da, db, dc = spec.dim_a, spec.dim_b, spec.dim_c
    layout = SubsystemLayout.of(zip(spec.labels, (da, db, dc)))
    tensor = np.zeros((da, db, dc, da, db, dc), dtype=complex)
    offset = 0
    for block in spec.blocks:
        dm = block.middle_dim
        piece = kron(block.left, block.right).reshape(da, dm, dc, da, dm, dc)
        window = slice(offset, offset + dm)
        tensor[:, window, :, :, window, :] += block.weight * piece
        offset += dm
    side = layout.total_dim
    return DensityMatrix(layout, tensor.reshape(side, side))


def markov_demo_spec() -> MarkovSpec:
    """Two-block Markov state on A:2, B:4, C:2 with I(A:C) > 0."""

    bell = bell_state().matrix
    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    return MarkovSpec(
        blocks=(
            MarkovBlock(0.5, left=bell, right=zero, left_dim=2, right_dim=1),
            MarkovBlock(0.5, left=one, right=bell, left_dim=1, right_dim=2),
        ),
        dim_a=2,
        dim_c=2,
    )


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def _density_array(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    g = _ginibre(rng, dim, rank)
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_markov_spec(
    seed: Seed,
    *,
    dim_a: int = 2,
    dim_c: int = 2,
    block_dims: Sequence[tuple[int, int]] = ((1, 2), (2, 1)),
) -> MarkovSpec:
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(len(block_dims)))
    weights = weights / weights.sum()
    blocks = []
    for weight, (left_dim, right_dim) in zip(weights, block_dims):
        dl = dim_a * left_dim
        dr = right_dim * dim_c
        blocks.append(
            MarkovBlock(
                float(weight),
                left=_density_array(rng, dl, int(rng.integers(1, dl + 1))),
                right=_density_array(rng, dr, int(rng.integers(1, dr + 1))),
                left_dim=left_dim,
                right_dim=right_dim,
            )
        )
    blocks[-1] = MarkovBlock(
        1.0 - sum(b.weight for b in blocks[:-1]),
        left=blocks[-1].left,
        right=blocks[-1].right,
        left_dim=blocks[-1].left_dim,
        right_dim=blocks[-1].right_dim,
    )
    return MarkovSpec(tuple(blocks), dim_a=dim_a, dim_c=dim_c)


def random_pure(layout: SubsystemLayout, seed: Seed) -> DensityMatrix:
    """Haar-random pure state: projector onto a normalized complex Gaussian vector."""

    rng = _rng(seed)
    return pure_state(_ginibre(rng, layout.total_dim, 1)[:, 0], layout)


def random_mixed(layout: SubsystemLayout, rank: int, seed: Seed) -> DensityMatrix:
    """Hilbert-Schmidt-type mixed state G G^dagger / tr, G of shape dim x rank."""

    if int(rank) != rank or rank < 1 or rank > layout.total_dim:
        raise TensorError(f"rank must be in [1, {layout.total_dim}], got {rank!r}")
    rng = _rng(seed)
    return DensityMatrix(layout, _density_array(rng, layout.total_dim, int(rank)))


def pair_product(layout: SubsystemLayout, seed: Seed) -> DensityMatrix:
    """Random pure state on a random pair of parties times random single-party states.

    Every single-party factor is either pure or full rank with equal odds.
    """

    rng = _rng(seed)
    labels = layout.labels
    if len(labels) < 2:
        raise TensorError("pair_product needs at least two parties")
    pairs = list(itertools.combinations(labels, 2))
    pair = pairs[int(rng.integers(len(pairs)))]
    factors = [random_pure(layout.restrict(pair), rng)]
    for label in labels:
        if label in pair:
            continue
        single = layout.restrict([label])
        rank = 1 if rng.random() < 0.5 else single.total_dim
        factors.append(random_mixed(single, rank, rng))
    return permute_parties(product_state(*factors), labels)


def relabel(rho: DensityMatrix, labels: Sequence[str]) -> DensityMatrix:
    if len(labels) != len(rho.labels):
        raise TensorError(f"need {len(rho.labels)} labels, got {list(labels)}")
    layout = SubsystemLayout.of(zip(labels, rho.layout.dims))
    return DensityMatrix(layout, rho.matrix)


def qubit_labels(n: int) -> str:
    return _LABELS[:n]


__all__ = [
    "MarkovBlock",
    "MarkovSpec",
    "basis_state",
    "bell_product",
    "bell_state",
    "classical_two_term",
    "ghz_mixture",
    "ghz_state",
    "markov_demo_spec",
    "markov_state",
    "maximally_mixed",
    "pair_product",
    "additivity_state",
    "pure_state",
    "random_markov_spec",
    "random_mixed",
    "random_pure",
    "relabel",
]
