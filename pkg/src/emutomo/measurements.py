"""Projective measurement sets for polarization tomography."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .operators import OperatorError, ket_projector

KET_NORM_ATOL = 1e-12
COMPLETE_ATOL = 1e-9

_S = 1 / np.sqrt(2)

# |R> = (1, -i)/sqrt2 and |L> = (1, +i)/sqrt2; files carry explicit amplitudes,
# so data recorded with the opposite convention can still be loaded.
POLARIZATION_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, -1j * _S], dtype=complex),
    "L": np.array([_S, 1j * _S], dtype=complex),
}

# the sixteen analyzer settings of the two-photon experiment, in order
WHITE_LABELS = (
    "HH", "HV", "VH", "VV", "HD", "HL", "DH", "RH",
    "DD", "RD", "RL", "DR", "DV", "RV", "VD", "VL",
)


def polarization_ket(label: str) -> np.ndarray:
    try:
        return POLARIZATION_KETS[label].copy()
    except KeyError:
        raise ValueError(
            f"unknown polarization label {label!r}; expected one of {sorted(POLARIZATION_KETS)}"
        ) from None


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two kets, index = i_a * d_b + i_b."""
    return np.kron(np.asarray(a, dtype=complex).ravel(), np.asarray(b, dtype=complex).ravel())


@dataclass(frozen=True)
class Projector:
    label: str
    ket: np.ndarray

    def __post_init__(self):
        ket = np.asarray(self.ket, dtype=complex).ravel()
        norm = np.linalg.norm(ket)
        if abs(norm - 1.0) > KET_NORM_ATOL:
            raise ValueError(f"projector {self.label!r} ket has norm {norm!r}, expected 1")
        object.__setattr__(self, "ket", ket)

    @property
    def matrix(self) -> np.ndarray:
        return ket_projector(self.ket)


@dataclass(frozen=True)
class FrameOperator:
    matrix: np.ndarray
    complete: bool


class MeasurementSet:
    """Ordered collection of rank-1 projectors on a d-dimensional space.

    The kets are stored row-wise in ``kets`` (shape ``(M, d)``) so that Born
    probabilities for every outcome can be computed in one vectorized call.
    """

    def __init__(self, projectors):
        projectors = tuple(projectors)
        if not projectors:
            raise ValueError("measurement set must contain at least one projector")
        dims = {p.ket.size for p in projectors}
        if len(dims) != 1:
            raise ValueError(f"projector kets have inconsistent dimensions {sorted(dims)}")
        labels = [p.label for p in projectors]
        dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
        if dupes:
            raise ValueError(f"duplicate projector labels: {dupes}")
        self.projectors = projectors
        self.dimension = dims.pop()
        self.kets = np.array([p.ket for p in projectors])
        self.kets.setflags(write=False)

    @classmethod
    def from_kets(cls, labels, kets, normalize=False):
        kets = [np.asarray(k, dtype=complex).ravel() for k in kets]
        if normalize:
            kets = [k / np.linalg.norm(k) for k in kets]
        return cls(Projector(lab, k) for lab, k in zip(labels, kets, strict=True))

    @classmethod
    def from_labels(cls, labels):
        """Build a product-state set from polarization labels such as ``"HD"``."""
        kets = []
        for lab in labels:
            ket = np.array([1.0 + 0j])
            for ch in lab:
                ket = tensor(ket, polarization_ket(ch))
            kets.append(ket)
        return cls.from_kets(labels, kets)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.projectors)

    def __len__(self):
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, i):
        return self.projectors[i]

    def __repr__(self):
        return f"MeasurementSet(d={self.dimension}, labels={list(self.labels)})"

    def born(self, rho) -> np.ndarray:
        """Unnormalized Born probabilities <y_j|rho|y_j> for every projector."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dimension, self.dimension):
            raise ValueError(
                f"dimension mismatch: state is {rho.shape}, measurement set has d={self.dimension}"
            )
        return np.einsum("ji,ik,jk->j", self.kets.conj(), rho, self.kets).real

    def weighted_sum(self, weights) -> np.ndarray:
        """sum_j w_j |y_j><y_j|."""
        w = np.asarray(weights, dtype=float)
        return (self.kets.T * w[None, :]) @ self.kets.conj()


def white_measurement_set() -> MeasurementSet:
    return MeasurementSet.from_labels(WHITE_LABELS)


def pauli_measurement_set(n_qubits: int = 1) -> MeasurementSet:
    """All products of the six Pauli eigenstates H, V, D, A, R, L (6**n projectors)."""
    single = "HVDARL"
    return MeasurementSet.from_labels(["".join(t) for t in product(single, repeat=n_qubits)])


def frame_operator(mset: MeasurementSet) -> FrameOperator:
    h = mset.weighted_sum(np.ones(len(mset)))
    complete = bool(np.max(np.abs(h - np.eye(mset.dimension))) <= COMPLETE_ATOL)
    return FrameOperator(h, complete)


def transform_set(mset: MeasurementSet, u) -> MeasurementSet:
    """Apply a common unitary to every ket of a set."""
    u = np.asarray(u, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(mset.dimension), atol=1e-12):
        raise OperatorError("transform_set needs a unitary matrix")
    return MeasurementSet.from_kets(mset.labels, (mset.kets @ u.T), normalize=True)
