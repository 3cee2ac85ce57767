"""Spectral entropy functionals and the (strong) subadditivity margins they enter."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from tensor_core import SETTINGS, DensityMatrix, TensorError, clamp_spectrum, hermitian_eigh

logger = logging.getLogger(__name__)

VON_NEUMANN = "vonNeumann"
TSALLIS = "tsallis"


class EntropyError(ValueError):
    """Raised for an invalid entropy parameter or incompatible arguments."""


@dataclass(frozen=True)
class EntropySpec:
    kind: str = VON_NEUMANN
    q: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind == VON_NEUMANN:
            if self.q is not None:
                raise EntropyError("von Neumann entropy takes no q parameter")
            return
        if self.kind != TSALLIS:
            raise EntropyError(f"unknown entropy kind {self.kind!r}")
        if self.q is None or not math.isfinite(self.q) or self.q <= 0 or self.q == 1:
            raise EntropyError(f"Tsallis entropy needs q > 0 and q != 1, got {self.q!r}")
        if self.q < 1:
            logger.warning("[entropy] q=%s lies in (0,1); S_q is neither sub- nor superadditive there", self.q)

    @classmethod
    def tsallis(cls, q: float) -> "EntropySpec":
        return cls(TSALLIS, float(q))

    @property
    def is_tsallis(self) -> bool:
        return self.kind == TSALLIS

    def __str__(self) -> str:
        return f"S_{self.q:g}" if self.is_tsallis else "S"


VN = EntropySpec()


def spectral_entropy(eigenvalues: np.ndarray, spec: EntropySpec = VN) -> float:
    lam = clamp_spectrum(eigenvalues)
    if spec.is_tsallis:
        q = float(spec.q)  # type: ignore[arg-type]
        return float((1.0 - np.sum(lam**q)) / (q - 1.0))
    nz = lam[lam > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-tr(rho log2 rho) in bits."""

    return spectral_entropy(rho.spectrum, VN)


def tsallis_entropy(rho: DensityMatrix, q: float) -> float:
    """(1 - tr rho^q) / (q - 1)."""

    return spectral_entropy(rho.spectrum, EntropySpec.tsallis(q))


def entropy(rho: DensityMatrix, spec: EntropySpec = VN) -> float:
    return spectral_entropy(rho.spectrum, spec)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """tr(rho log2 rho - rho log2 sigma); ``math.inf`` when supp(rho) is not inside supp(sigma)."""

    if rho.matrix.shape != sigma.matrix.shape:
        raise EntropyError(f"dimension mismatch: {rho.matrix.shape} vs {sigma.matrix.shape}")
    mu, vectors = hermitian_eigh(sigma.matrix)
    mu = clamp_spectrum(mu)
    # <v_j| rho |v_j> for every eigenvector of sigma
    weights = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), rho.matrix, vectors))
    kernel = mu <= SETTINGS.clamp_tolerance
    if np.any(kernel) and float(np.sum(weights[kernel])) > SETTINGS.support_tolerance:
        return math.inf
    cross = float(np.sum(weights[~kernel] * np.log2(mu[~kernel])))
    value = -von_neumann_entropy(rho) - cross
    return max(value, 0.0) if value > -SETTINGS.clamp_tolerance else value


class MarginalEntropies:
    """Per-state cache of marginal entropies keyed by label set."""

    def __init__(self, rho: DensityMatrix, spec: EntropySpec = VN) -> None:
        self.rho = rho
        self.spec = spec
        self._cache: dict[frozenset[str], float] = {frozenset(): 0.0}

    def __call__(self, labels: Iterable[str]) -> float:
        key = frozenset(labels)
        value = self._cache.get(key)
        if value is None:
            try:
                marginal = self.rho.marginal(key)
            except TensorError as exc:
                raise EntropyError(str(exc)) from exc
            value = spectral_entropy(marginal.spectrum, self.spec)
            self._cache[key] = value
        return value


def ssa_margin(
    rho: DensityMatrix,
    a: Iterable[str],
    b: Iterable[str],
    c: Iterable[str],
    spec: EntropySpec = VN,
    *,
    entropies: Optional[MarginalEntropies] = None,
) -> float:
    """S(AB) + S(BC) - S(ABC) - S(B) for disjoint label sets A, B, C."""

    sa, sb, sc = frozenset(a), frozenset(b), frozenset(c)
    if sa & sb or sa & sc or sb & sc:
        raise EntropyError(f"label sets overlap: {sorted(sa)}, {sorted(sb)}, {sorted(sc)}")
    if not (sa and sb and sc):
        raise EntropyError("ssa_margin needs three non-empty label sets")
    s = entropies if entropies is not None else MarginalEntropies(rho, spec)
    return s(sa | sb) + s(sb | sc) - s(sa | sb | sc) - s(sb)


__all__ = [
    "EntropyError",
    "EntropySpec",
    "MarginalEntropies",
    "TSALLIS",
    "VN",
    "VON_NEUMANN",
    "entropy",
    "relative_entropy",
    "spectral_entropy",
    "ssa_margin",
    "tsallis_entropy",
    "von_neumann_entropy",
]
