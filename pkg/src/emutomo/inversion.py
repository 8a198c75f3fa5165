"""Direct linear inversion of the Born rule ("standard" tomography).

The data are fitted by a Hermitian matrix ``X`` in the least-squares sense,
``f_j ~ <y_j|X|y_j>``, and the estimate is ``X / Tr X``. Fitting the trace
as a free scale lets the same routine take normalized frequencies, per-basis
probabilities or raw counts, and handles sets whose projectors do not sum to
the identity. Positivity is deliberately not imposed, so noisy data can (and
typically do) produce negative eigenvalues.

Parameter ordering for ``X`` (``d**2`` real numbers):

* ``X[k, k]`` for ``k = 0 .. d-1``;
* then, for each ``k < l`` in row-major order, ``Re X[k, l]`` followed by
  ``Im X[k, l]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurements import MeasurementSet
from .operators import as_hermitian

RANK_RTOL = 1e-10
PHYSICAL_ATOL = 1e-10


class InformationallyIncomplete(ValueError):
    pass


@dataclass(frozen=True)
class InversionReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending
    min_eigenvalue: float
    physical: bool
    residual: float
    rank: int


def hermitian_basis(d: int) -> np.ndarray:
    """The ``d**2`` real-coefficient basis matrices, shape ``(d*d, d, d)``."""
    basis = []
    for k in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[k, k] = 1
        basis.append(e)
    for k in range(d):
        for l in range(k + 1, d):
            re = np.zeros((d, d), dtype=complex)
            re[k, l] = re[l, k] = 1
            im = np.zeros((d, d), dtype=complex)
            im[k, l], im[l, k] = 1j, -1j
            basis += [re, im]
    return np.array(basis)


def design_matrix(mset: MeasurementSet) -> np.ndarray:
    """A[j, a] = <y_j|B_a|y_j>."""
    basis = hermitian_basis(mset.dimension)
    y = mset.kets
    return np.einsum("ji,aik,jk->ja", y.conj(), basis, y).real


def eigen_report(m) -> tuple[np.ndarray, bool]:
    """Descending eigenvalues and whether the matrix is positive semidefinite."""
    vals = np.linalg.eigvalsh(as_hermitian(m, atol=1e-10))[::-1]
    return vals, bool(vals[-1] >= -PHYSICAL_ATOL)


def linear_invert(f, mset: MeasurementSet) -> InversionReport:
    f = np.asarray(f, dtype=float).ravel()
    if f.size != len(mset):
        raise ValueError(f"{f.size} data values for {len(mset)} projectors")
    d = mset.dimension
    a = design_matrix(mset)
    theta, _, rank, _ = np.linalg.lstsq(a, f, rcond=RANK_RTOL)
    if rank < d * d:
        raise InformationallyIncomplete(
            f"measurement set not informationally complete: design matrix rank {rank}, need {d * d}"
        )
    x = np.tensordot(theta, hermitian_basis(d), axes=1)
    tr = np.trace(x).real
    if tr <= 0:
        raise ValueError(f"fitted operator has non-positive trace {tr:.3e}; data cannot be normalized")
    rho = x / tr
    rho = 0.5 * (rho + rho.conj().T)
    vals, physical = eigen_report(rho)
    return InversionReport(
        matrix=rho,
        eigenvalues=vals,
        min_eigenvalue=float(vals[-1]),
        physical=physical,
        residual=float(np.linalg.norm(a @ theta - f)),
        rank=int(rank),
    )
