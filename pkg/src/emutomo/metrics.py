"""Distances between density matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import OperatorError, as_hermitian

PSD_ATOL = 1e-8
SPECTRUM_RTOL = 1e-14


def _state(a) -> np.ndarray:
    a = as_hermitian(a, atol=1e-10)
    if np.linalg.eigvalsh(a)[0] < -PSD_ATOL:
        raise OperatorError("fidelity needs positive semidefinite inputs")
    return a


def fidelity(a, b) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))**2, clipped to [0, 1].

    ``b`` is compressed onto the support of ``a`` first, and eigenvalues below
    ``SPECTRUM_RTOL`` of the largest are dropped: square roots of round-off
    zeros would otherwise add errors of order 1e-8.
    """
    a, b = _state(a), _state(b)
    if a.shape != b.shape:
        raise OperatorError(f"dimension mismatch: {a.shape} vs {b.shape}")
    lam, vecs = np.linalg.eigh(a)
    keep = lam > SPECTRUM_RTOL * lam[-1]
    s = vecs[:, keep] * np.sqrt(lam[keep])[None, :]
    m = s.conj().T @ b @ s
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    w = w[w > SPECTRUM_RTOL * max(w[-1], 0.0)]
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise OperatorError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = as_hermitian(a - b, atol=1e-10)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


@dataclass(frozen=True)
class ComparisonMetrics:
    fidelity: float
    trace_distance: float
    eigenvalues_estimate: np.ndarray
    eigenvalues_reference: np.ndarray

    @property
    def eigenvalue_gaps(self) -> np.ndarray:
        return self.eigenvalues_estimate - self.eigenvalues_reference


def compare_states(estimate, reference) -> ComparisonMetrics:
    return ComparisonMetrics(
        fidelity=fidelity(estimate, reference),
        trace_distance=trace_distance(estimate, reference),
        eigenvalues_estimate=np.linalg.eigvalsh(as_hermitian(estimate, atol=1e-10))[::-1],
        eigenvalues_reference=np.linalg.eigvalsh(as_hermitian(reference, atol=1e-10))[::-1],
    )
