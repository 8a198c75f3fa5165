"""Dense linear algebra on small Hilbert spaces.

Operators are plain complex ``numpy`` arrays. The helpers here validate the
structural invariants (Hermiticity, unit trace, positivity, unitarity) and
implement the handful of spectral operations the reconstruction needs.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10


class OperatorError(ValueError):
    """Raised when an operator violates a structural invariant."""


def _square(a, name="operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise OperatorError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def max_asymmetry(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def as_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``a`` symmetrized, after checking it is Hermitian.

    The tolerance is scaled by the largest entry so that operators of large
    norm (e.g. an R operator built from skewed data) are not rejected for
    round-off.
    """
    a = _square(a)
    asym = max_asymmetry(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if asym > atol * scale:
        raise OperatorError(f"matrix is not Hermitian: max |A - A^dagger| = {asym:.3e}")
    return 0.5 * (a + a.conj().T)


def as_density_matrix(rho) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise OperatorError(f"density matrix trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -PSD_ATOL:
        raise OperatorError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each eigenvector made real-positive
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)[None, :]


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        (eigenvalues, eigenvectors): eigenvalues in ascending order and the
        matching orthonormal eigenvectors as *columns*. Each eigenvector has
        its largest-magnitude component real and positive, so the output is
        deterministic up to rotations within degenerate eigenspaces.
    """
    a = as_hermitian(a)
    vals, vecs = np.linalg.eigh(a)
    return vals, _fix_phases(vecs)


def expectation(rho, y) -> float:
    """Born probability <y|rho|y>, clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    y = np.asarray(y, dtype=complex).ravel()
    if rho.shape != (y.size, y.size):
        raise OperatorError(f"dimension mismatch: rho {rho.shape} vs ket of length {y.size}")
    val = float(np.real(y.conj() @ rho @ y))
    return min(max(val, 0.0), 1.0)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise OperatorError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def unitary_from_generator(g, eps: float) -> np.ndarray:
    """exp(i*eps*G) for Hermitian G, computed spectrally (exactly unitary)."""
    vals, vecs = np.linalg.eigh(as_hermitian(g))
    return (vecs * np.exp(1j * eps * vals)[None, :]) @ vecs.conj().T


def psd_power(h, power: float, cutoff: float = 1e-12) -> np.ndarray:
    """H**power on the support of a PSD matrix H.

    Eigenvalues at or below ``cutoff * max_eigenvalue`` are treated as zero and
    mapped to zero regardless of the sign of ``power``.
    """
    vals, vecs = np.linalg.eigh(as_hermitian(h))
    if vals.size and vals[0] < -PSD_ATOL * max(1.0, abs(vals[-1])):
        raise OperatorError(f"matrix is not positive semidefinite: eigenvalue {vals[0]:.3e}")
    top = vals[-1] if vals.size else 0.0
    keep = vals > cutoff * top
    out = np.zeros_like(vals)
    out[keep] = vals[keep] ** power
    return (vecs * out[None, :]) @ vecs.conj().T


def inv_sqrt_psd(h, cutoff: float = 1e-12) -> np.ndarray:
    return psd_power(h, -0.5, cutoff)


def sqrt_psd(h, cutoff: float = 1e-12) -> np.ndarray:
    return psd_power(h, 0.5, cutoff)


def support_projector(h, cutoff: float = 1e-12) -> np.ndarray:
    return psd_power(h, 0.0, cutoff)


def ket_projector(y) -> np.ndarray:
    y = np.asarray(y, dtype=complex).ravel()
    return np.outer(y, y.conj())


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
