"""The six multipartite mutual information quantities and the pure-state entanglement functionals.

Each block of a partition is treated as one composite subsystem and parties
outside the partition are traced out first:

* ``I`` / ``Iq``: sum of block entropies minus the entropy of the union.
* ``Iprime`` / ``Iqprime``: sum of complement entropies (complements taken
  inside the partition's party set) minus (k - 1) times the union entropy.
* ``Idprime`` / ``Iqdprime``: the inclusion-exclusion form on exactly 3 blocks.

The Tsallis kinds need q > 1; S_q is neither sub- nor superadditive for
0 < q < 1, so no mutual information is defined there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from entropy import VN, EntropySpec, MarginalEntropies
from partitions import Partition, coarser_partitions
from tensor_core import DensityMatrix

KINDS = ("I", "Iprime", "Idprime", "Iq", "Iqprime", "Iqdprime")
TSALLIS_KINDS = frozenset({"Iq", "Iqprime", "Iqdprime"})
TYPE_THREE_KINDS = frozenset({"Idprime", "Iqdprime"})

_ALIASES = {
    "I'": "Iprime",
    "I''": "Idprime",
    "Iq'": "Iqprime",
    "Iq''": "Iqdprime",
}

_LABELS = {
    "I": "I",
    "Iprime": "I'",
    "Idprime": "I''",
    "Iq": "Iq",
    "Iqprime": "Iq'",
    "Iqdprime": "Iq''",
}


class MqmiError(ValueError):
    """Raised for an invalid quantity specification or an incompatible partition."""


@dataclass(frozen=True)
class MqmiSpec:
    kind: str
    q: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise MqmiError(f"unknown MQMI kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in TSALLIS_KINDS:
            if self.q is None:
                raise MqmiError(f"{self.kind} needs a Tsallis parameter q > 1")
            if not math.isfinite(self.q) or self.q <= 1.0:
                raise MqmiError(
                    f"{self.kind} needs q > 1, got {self.q}: S_q is not subadditive for 0 < q < 1, "
                    "so the mutual information is undefined there"
                )
        elif self.q is not None:
            raise MqmiError(f"{self.kind} is a von Neumann quantity and takes no q")

    @classmethod
    def parse(cls, kind: str, q: Optional[float] = None) -> "MqmiSpec":
        kind = _ALIASES.get(kind, kind)
        if kind not in TSALLIS_KINDS:
            q = None
        return cls(kind, q)

    @property
    def entropy(self) -> EntropySpec:
        return EntropySpec.tsallis(self.q) if self.kind in TSALLIS_KINDS else VN  # type: ignore[arg-type]

    @property
    def is_tsallis(self) -> bool:
        return self.kind in TSALLIS_KINDS

    @property
    def base(self) -> str:
        """Kind family ignoring the entropy: ``I``, ``Iprime`` or ``Idprime``."""

        return {"Iq": "I", "Iqprime": "Iprime", "Iqdprime": "Idprime"}.get(self.kind, self.kind)

    @property
    def label(self) -> str:
        return _LABELS[self.kind]

    def with_kind(self, kind: str) -> "MqmiSpec":
        return MqmiSpec.parse(kind, self.q)

    def to_dict(self) -> dict[str, object]:
        return {"kind": self.kind, "q": self.q}

    def __str__(self) -> str:
        return f"{self.label}(q={self.q:g})" if self.is_tsallis else self.label


@dataclass(frozen=True)
class MqmiValue:
    value: float
    spec: MqmiSpec
    partition: Partition

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise MqmiError(f"non-finite {self.spec} value on {self.partition}")

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict[str, object]:
        return {"value": self.value, "partition": str(self.partition), **self.spec.to_dict()}


def _evaluate(s: MarginalEntropies, partition: Partition, spec: MqmiSpec) -> float:
    blocks = partition.block_sets
    union = partition.parties
    k = len(blocks)
    if spec.base == "I":
        return sum(s(block) for block in blocks) - s(union)
    if spec.base == "Iprime":
        return sum(s(union - block) for block in blocks) - (k - 1) * s(union)
    if k != 3:
        raise MqmiError(f"{spec.label} is defined on exactly 3 blocks, got {partition}")
    x1, x2, x3 = blocks
    return (
        s(x1) + s(x2) + s(x3)
        - (s(x1 | x2) + s(x1 | x3) + s(x2 | x3))
        + s(union)
    )


def mqmi(
    rho: DensityMatrix,
    partition: Partition,
    spec: MqmiSpec,
    *,
    entropies: Optional[MarginalEntropies] = None,
) -> MqmiValue:
    """Evaluate ``spec`` on ``partition``; parties outside the partition are traced out."""

    unknown = partition.parties.difference(rho.labels)
    if unknown:
        raise MqmiError(f"partition {partition} uses labels {sorted(unknown)} missing from layout {rho.labels}")
    if spec.kind in TYPE_THREE_KINDS and len(partition) != 3:
        raise MqmiError(f"{spec.label} is defined on exactly 3 blocks, got {partition}")
    if entropies is None or entropies.spec != spec.entropy or entropies.rho is not rho:
        entropies = MarginalEntropies(rho, spec.entropy)
    return MqmiValue(_evaluate(entropies, partition, spec), spec, partition)


def mqmi_all_coarsenings(
    rho: DensityMatrix,
    partition: Partition,
    spec: MqmiSpec,
    *,
    entropies: Optional[MarginalEntropies] = None,
) -> dict[Partition, MqmiValue]:
    """Values on every partition coarser than ``partition`` that the kind is defined on."""

    if entropies is None:
        entropies = MarginalEntropies(rho, spec.entropy)
    result = {}
    for candidate in sorted(coarser_partitions(partition), key=str):
        if len(candidate) < 2:
            continue
        if spec.kind in TYPE_THREE_KINDS and len(candidate) != 3:
            continue
        result[candidate] = mqmi(rho, candidate, spec, entropies=entropies)
    return result


def _require_pure(rho: DensityMatrix, name: str) -> None:
    if not rho.is_pure():
        raise MqmiError(f"{name} needs a pure state (purity {rho.purity:.12f})")


def _half_block_sum(rho: DensityMatrix, partition: Partition, spec: EntropySpec) -> float:
    unknown = partition.parties.difference(rho.labels)
    if unknown:
        raise MqmiError(f"partition {partition} uses labels {sorted(unknown)} missing from layout {rho.labels}")
    s = MarginalEntropies(rho, spec)
    return 0.5 * sum(s(block) for block in partition.block_sets)


def pure_ef(rho: DensityMatrix, partition: Partition) -> float:
    """Entanglement of formation of a pure state: half the sum of block entropies."""

    _require_pure(rho, "pure_ef")
    return _half_block_sum(rho, partition, VN)


def pure_eq(rho: DensityMatrix, partition: Partition, q: float) -> float:
    """Tsallis-q entanglement of a pure state: half the sum of block S_q."""

    _require_pure(rho, "pure_eq")
    if q <= 1:
        raise MqmiError(f"pure_eq needs q > 1, got {q}")
    return _half_block_sum(rho, partition, EntropySpec.tsallis(q))


def concurrence(rho: DensityMatrix, block: frozenset[str] | str) -> float:
    """sqrt(2 (1 - tr rho_X^2)) for the block X of a pure-state bipartition X | complement."""

    _require_pure(rho, "concurrence")
    keep = frozenset(block)
    if not keep or not keep < frozenset(rho.labels):
        raise MqmiError(f"block {sorted(keep)} must be a non-empty strict subset of {rho.labels}")
    purity = rho.marginal(keep).purity
    return float(np.sqrt(max(2.0 * (1.0 - purity), 0.0)))


__all__ = [
    "KINDS",
    "MqmiError",
    "MqmiSpec",
    "MqmiValue",
    "TSALLIS_KINDS",
    "TYPE_THREE_KINDS",
    "concurrence",
    "mqmi",
    "mqmi_all_coarsenings",
    "pure_ef",
    "pure_eq",
]
