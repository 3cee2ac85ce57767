"""Dense density-matrix kernel.

Layouts, tensor products, partial traces and Hermitian spectra for small
multipartite systems. Party order in a layout fixes the tensor index order
(row-major, the last party varies fastest) and every reduction keeps the
relative order of the surviving parties.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from config_loader import numerics_settings

logger = logging.getLogger(__name__)

SETTINGS = numerics_settings()

ComplexMatrix = np.ndarray


class TensorError(ValueError):
    """Raised when a matrix, layout or state violates the kernel's invariants."""


class StateValidationError(TensorError):
    """Raised when a candidate density matrix fails one or more invariants."""

    def __init__(self, failures: Sequence[str]) -> None:
        self.failures = list(failures)
        super().__init__("invalid density matrix: " + "; ".join(self.failures))


class NonConvergenceError(TensorError):
    """Raised when the Jacobi eigensolver exhausts its sweep limit."""


def _guard(dim: int) -> None:
    if dim > SETTINGS.dimension_guard:
        raise TensorError(f"dimension {dim} exceeds the guard of {SETTINGS.dimension_guard}")


@dataclass(frozen=True)
class Party:
    label: str
    dim: int

    def __post_init__(self) -> None:
        if not self.label or not isinstance(self.label, str):
            raise TensorError(f"party label must be a non-empty string, got {self.label!r}")
        if "|" in self.label or ":" in self.label or "," in self.label:
            raise TensorError(f"party label {self.label!r} contains a reserved character")
        if int(self.dim) != self.dim or self.dim < 2:
            raise TensorError(f"party {self.label!r} needs an integer dimension >= 2, got {self.dim!r}")


@dataclass(frozen=True)
class SubsystemLayout:
    parties: tuple[Party, ...]

    def __post_init__(self) -> None:
        if not self.parties:
            raise TensorError("layout needs at least one party")
        labels = [party.label for party in self.parties]
        if len(set(labels)) != len(labels):
            raise TensorError(f"duplicate party labels in layout: {labels}")
        _guard(self.total_dim)

    @classmethod
    def of(cls, spec: Iterable[tuple[str, int]]) -> "SubsystemLayout":
        return cls(tuple(Party(label, int(dim)) for label, dim in spec))

    @classmethod
    def qubits(cls, labels: int | str | Sequence[str]) -> "SubsystemLayout":
        if isinstance(labels, int):
            labels = "ABCDEFGHIJ"[:labels]
        return cls.of((label, 2) for label in labels)

    @classmethod
    def parse(cls, text: str) -> "SubsystemLayout":
        """Parse ``"A:2,B:2,C:3"``."""

        entries = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            label, sep, dim = chunk.partition(":")
            if not sep:
                raise TensorError(f"party spec {chunk!r} must look like label:dim")
            try:
                entries.append((label.strip(), int(dim)))
            except ValueError as exc:
                raise TensorError(f"party spec {chunk!r} has a non-integer dimension") from exc
        return cls.of(entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(party.label for party in self.parties)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(party.dim for party in self.parties)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise TensorError(f"unknown party label {label!r}; layout has {self.labels}") from exc

    def restrict(self, keep: Iterable[str]) -> "SubsystemLayout":
        keep_set = set(keep)
        for label in keep_set:
            self.index(label)
        return SubsystemLayout(tuple(p for p in self.parties if p.label in keep_set))

    def reorder(self, order: Sequence[str]) -> "SubsystemLayout":
        if sorted(order) != sorted(self.labels):
            raise TensorError(f"order {list(order)} is not a permutation of {list(self.labels)}")
        return SubsystemLayout(tuple(self.parties[self.index(label)] for label in order))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.parties + other.parties)

    def to_list(self) -> list[dict[str, Any]]:
        return [{"label": p.label, "dim": p.dim} for p in self.parties]

    def __str__(self) -> str:
        return ",".join(f"{p.label}:{p.dim}" for p in self.parties)


def validation_failures(matrix: np.ndarray, dim: int) -> list[str]:
    """Return a description of every DensityMatrix invariant the array breaks."""

    failures: list[str] = []
    if matrix.ndim != 2 or matrix.shape != (dim, dim):
        return [f"shape {matrix.shape} does not match layout dimension {dim}"]
    if not np.all(np.isfinite(matrix)):
        return ["matrix contains NaN or infinite entries"]
    deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
    if deviation > SETTINGS.hermitian_tolerance:
        failures.append(f"not Hermitian (max |M - M^dagger| = {deviation:.3e})")
    trace = complex(np.trace(matrix))
    if abs(trace - 1.0) > SETTINGS.trace_tolerance:
        failures.append(f"trace {trace.real:.12f}{trace.imag:+.3e}j differs from 1")
    if not failures:
        lowest = float(hermitian_eigenvalues(matrix)[0])
        if lowest < -SETTINGS.clamp_tolerance:
            failures.append(f"not positive semidefinite (lowest eigenvalue {lowest:.3e})")
    return failures


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: SubsystemLayout
    matrix: ComplexMatrix = field(repr=False)

    def __post_init__(self) -> None:
        array = np.array(self.matrix, dtype=complex, copy=True)
        array.setflags(write=False)
        object.__setattr__(self, "matrix", array)

    @classmethod
    def from_array(cls, layout: SubsystemLayout, matrix: Any, *, validate: bool = True) -> "DensityMatrix":
        array = np.asarray(matrix, dtype=complex)
        if validate:
            failures = validation_failures(array, layout.total_dim)
            if failures:
                raise StateValidationError(failures)
        elif array.shape != (layout.total_dim, layout.total_dim):
            raise TensorError(f"shape {array.shape} does not match layout dimension {layout.total_dim}")
        return cls(layout, array)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues with the PSD clamp applied."""

        return clamp_spectrum(hermitian_eigenvalues(self.matrix))

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return self.purity >= 1.0 - tol

    def marginal(self, keep: Iterable[str]) -> "DensityMatrix":
        return partial_trace(self, keep)

    def to_dict(self) -> dict[str, Any]:
        flat = self.matrix.reshape(-1)
        return {
            "parties": self.layout.to_list(),
            "matrix": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "DensityMatrix":
        try:
            parties = payload["parties"]
            entries = payload["matrix"]
            layout = SubsystemLayout.of((str(p["label"]), int(p["dim"])) for p in parties)
        except (KeyError, TypeError, ValueError) as exc:
            raise TensorError(f"malformed state payload: {exc}") from exc
        dim = layout.total_dim
        if len(entries) != dim * dim:
            raise StateValidationError([f"matrix has {len(entries)} entries, expected {dim * dim}"])
        try:
            values = np.array([complex(float(re), float(im)) for re, im in entries], dtype=complex)
        except (TypeError, ValueError) as exc:
            raise TensorError(f"matrix entries must be [re, im] pairs: {exc}") from exc
        return cls.from_array(layout, values.reshape(dim, dim))


def load_state(path: str | Path) -> DensityMatrix:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TensorError(f"state file {path} is not valid JSON: {exc}") from exc
    return DensityMatrix.from_dict(payload)


def save_state(rho: DensityMatrix, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(rho.to_dict()), encoding="utf-8")
    return target


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Tensor product with index(i (x) j) = i * dim(b) + j."""

    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    _guard(a.shape[0] * b.shape[0])
    _guard(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def product_state(*factors: DensityMatrix) -> DensityMatrix:
    if not factors:
        raise TensorError("product_state needs at least one factor")
    layout = factors[0].layout
    matrix = factors[0].matrix
    for factor in factors[1:]:
        layout = layout.concat(factor.layout)
        matrix = kron(matrix, factor.matrix)
    return DensityMatrix(layout, matrix)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduce ``rho`` to the parties in ``keep``; kept parties stay in layout order."""

    keep_set = set(keep)
    if not keep_set:
        raise TensorError("partial_trace needs a non-empty keep set")
    labels = rho.layout.labels
    unknown = keep_set.difference(labels)
    if unknown:
        raise TensorError(f"unknown party labels {sorted(unknown)}; layout has {labels}")
    if keep_set == set(labels):
        return rho

    dims = list(rho.layout.dims)
    n = len(dims)
    kept = [i for i, label in enumerate(labels) if label in keep_set]
    traced = [i for i, label in enumerate(labels) if label not in keep_set]
    dk = math.prod(dims[i] for i in kept)
    dt = math.prod(dims[i] for i in traced)

    tensor = rho.matrix.reshape(dims + dims)
    order = kept + traced + [n + i for i in kept] + [n + i for i in traced]
    blocks = tensor.transpose(order).reshape(dk, dt, dk, dt)
    reduced = np.einsum("ajbj->ab", blocks)
    return DensityMatrix(rho.layout.restrict(keep_set), reduced)


def permute_parties(rho: DensityMatrix, order: Sequence[str]) -> DensityMatrix:
    """Reorder tensor factors so the layout reads ``order``; labels follow their systems."""

    layout = rho.layout.reorder(order)
    if layout.labels == rho.layout.labels:
        return rho
    dims = list(rho.layout.dims)
    n = len(dims)
    axes = [rho.layout.index(label) for label in order]
    tensor = rho.matrix.reshape(dims + dims).transpose(axes + [n + i for i in axes])
    return DensityMatrix(layout, tensor.reshape(rho.dim, rho.dim))


def _check_square_hermitian(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise TensorError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise TensorError("matrix contains NaN or infinite entries")
    deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if deviation > SETTINGS.input_hermitian_tolerance:
        raise TensorError(f"matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")
    return 0.5 * (m + m.conj().T)


def jacobi_eigh(
    m: np.ndarray,
    *,
    tol: float | None = None,
    max_sweeps: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi diagonalisation of a Hermitian matrix.

    Returns ascending eigenvalues and the matching unitary of eigenvectors
    (columns). Each rotation zeroes one off-diagonal pair after removing its
    phase, which reduces the 2x2 problem to the real symmetric case.
    """

    tol = SETTINGS.jacobi_tolerance if tol is None else tol
    max_sweeps = SETTINGS.jacobi_max_sweeps if max_sweeps is None else max_sweeps
    a = _check_square_hermitian(m).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    def off_norm() -> float:
        return float(np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0)))

    for sweep in range(max_sweeps + 1):
        if off_norm() < threshold:
            break
        if sweep == max_sweeps:
            raise NonConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off_norm():.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                beta = abs(b)
                if beta < 1e-300:
                    continue
                phase = b / beta
                app = a[p, p].real
                aqq = a[q, q].real
                zeta = (app - aqq) / (2.0 * beta)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, -s * phase], [s * np.conj(phase), c]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app + beta * t
                a[q, q] = aqq - beta * t
                v[:, idx] = v[:, idx] @ g

    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def hermitian_eigh(m: np.ndarray, *, solver: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors of a Hermitian matrix."""

    solver = solver or SETTINGS.eigensolver
    if solver == "jacobi":
        return jacobi_eigh(m)
    if solver != "lapack":
        raise TensorError(f"unknown eigensolver {solver!r}")
    values, vectors = np.linalg.eigh(_check_square_hermitian(m))
    return values, vectors


def hermitian_eigenvalues(m: np.ndarray, *, solver: str | None = None) -> np.ndarray:
    solver = solver or SETTINGS.eigensolver
    if solver == "jacobi":
        return jacobi_eigh(m)[0]
    if solver != "lapack":
        raise TensorError(f"unknown eigensolver {solver!r}")
    return np.linalg.eigvalsh(_check_square_hermitian(m))


def clamp_spectrum(values: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Zero eigenvalues in [-tol, 0); anything more negative is an invalid state."""

    tol = SETTINGS.clamp_tolerance if tol is None else tol
    values = np.asarray(values, dtype=float)
    if values.size and float(values.min()) < -tol:
        raise TensorError(f"eigenvalue {float(values.min()):.3e} is below the clamp tolerance -{tol:g}")
    return np.where(values < 0.0, 0.0, values)


def project_to_state(matrix: np.ndarray, layout: SubsystemLayout) -> DensityMatrix:
    """Nearest-by-spectrum density matrix: Hermitize, clip negative eigenvalues, renormalize."""

    hermitian = 0.5 * (matrix + matrix.conj().T)
    values, vectors = np.linalg.eigh(hermitian)
    values = np.clip(values, 0.0, None)
    total = float(values.sum())
    if total <= 0.0:
        raise TensorError("projection collapsed to the zero matrix")
    projected = (vectors * (values / total)) @ vectors.conj().T
    return DensityMatrix(layout, 0.5 * (projected + projected.conj().T))


__all__ = [
    "ComplexMatrix",
    "DensityMatrix",
    "NonConvergenceError",
    "Party",
    "StateValidationError",
    "SubsystemLayout",
    "TensorError",
    "clamp_spectrum",
    "hermitian_eigenvalues",
    "hermitian_eigh",
    "jacobi_eigh",
    "kron",
    "load_state",
    "partial_trace",
    "permute_parties",
    "product_state",
    "project_to_state",
    "save_state",
    "validation_failures",
]
