"""Random-state ensembles with per-sample seeds derived from (master seed, index)."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from states import pair_product, random_mixed, random_pure
from tensor_core import DensityMatrix, SubsystemLayout, product_state

from .report import ENSEMBLES, SweepConfig, VerificationError


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def half_product(layout: SubsystemLayout, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state on the first half of the parties times a pure state on the rest."""

    labels = layout.labels
    if len(labels) < 2:
        raise VerificationError("half-product needs at least two parties")
    cut = math.ceil(len(labels) / 2)
    left = layout.restrict(labels[:cut])
    right = layout.restrict(labels[cut:])
    return product_state(random_mixed(left, left.total_dim, rng), random_pure(right, rng))


def draw(ensemble: str, layout: SubsystemLayout, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    if ensemble == "haar-pure":
        return random_pure(layout, rng)
    if ensemble == "hs-mixed":
        if rank is None:
            rank = int(rng.integers(1, layout.total_dim + 1))
        return random_mixed(layout, rank, rng)
    if ensemble == "pair-product":
        return pair_product(layout, rng)
    if ensemble == "half-product":
        return half_product(layout, rng)
    raise VerificationError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")


def sample_state(config: SweepConfig, index: int) -> DensityMatrix:
    if not 0 <= index < config.samples:
        raise VerificationError(f"sample index {index} outside [0, {config.samples})")
    rank = config.rank
    if config.ensemble == "hs-mixed" and rank is None:
        rank = config.layout.total_dim
    return draw(config.ensemble, config.layout, sample_rng(config.seed, index), rank)
