"""Random instances and brute-force oracles shared by the test modules.

The oracles here never call into the solver; they only use the Born rule.
"""

import numpy as np

from emutomo.operators import PAULI_X, PAULI_Y, PAULI_Z


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_state(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def trace_dist(a, b):
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b)))


def bloch_to_rho(b):
    x, y, z = b
    return 0.5 * (np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def ket_bloch(ket):
    rho = np.outer(ket, ket.conj())
    return np.array([np.trace(rho @ s).real for s in (PAULI_X, PAULI_Y, PAULI_Z)])


def _ball_grid(center, half_width, step):
    axis = [np.arange(c - half_width, c + half_width + step / 2, step) for c in center]
    pts = np.stack(np.meshgrid(*axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return pts[np.einsum("ij,ij->i", pts, pts) <= 1.0]


def bloch_grid_ml(freqs, kets, step=2e-3):
    """Maximize sum_j f_j ln p_j over the Bloch ball by grid search.

    A coarse grid over the whole ball is refined twice around its best point,
    ending at spacing ``step``. The log-likelihood is concave in the Bloch
    vector, so refining around the coarse optimum does not miss the maximum.
    """
    f = np.asarray(freqs, dtype=float)
    dirs = np.array([ket_bloch(k) for k in kets])

    def best(pts):
        p = 0.5 * (1 + pts @ dirs.T)
        with np.errstate(divide="ignore"):
            ll = np.where(f > 0, f * np.log(np.clip(p, 1e-300, None)), 0.0).sum(axis=1)
        return pts[np.argmax(ll)]

    b = best(_ball_grid(np.zeros(3), 1.0, 0.04))
    b = best(_ball_grid(b, 0.12, 0.01))
    b = best(_ball_grid(b, 0.03, step))
    return b


def simplex_grid_ml(freqs, h, step=1e-4):
    """Maximize sum_j f_j ln (h @ r)_j over r on the 1-simplex (two eigenvalues)."""
    t = np.arange(step, 1.0, step)
    r = np.stack([t, 1 - t], axis=1)
    p = r @ np.asarray(h).T
    ll = (np.asarray(freqs) * np.log(p)).sum(axis=1)
    return r[np.argmax(ll)]


def expm_taylor(a, tol=1e-18):
    """exp(a) by summing the Taylor series until terms drop below ``tol``."""
    out = np.eye(a.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, 200):
        term = term @ a / k
        out = out + term
        if np.max(np.abs(term)) < tol:
            break
    return out


def traceless_basis(d):
    """Real basis of traceless Hermitian d x d matrices (d**2 - 1 elements)."""
    basis = []
    for k in range(d - 1):
        e = np.zeros((d, d), dtype=complex)
        e[k, k], e[d - 1, d - 1] = 1, -1
        basis.append(e)
    for k in range(d):
        for l in range(k + 1, d):
            a = np.zeros((d, d), dtype=complex)
            a[k, l] = a[l, k] = 1
            b = np.zeros((d, d), dtype=complex)
            b[k, l], b[l, k] = 1j, -1j
            basis += [a, b]
    return basis


def poisson_scale_crb(n, rho, kets):
    """Cramer-Rao standard deviation of log n for Poisson counts with means n <y|rho|y>.

    The state is a nuisance parameter, so the bound includes the spread of
    sum_j p_j(rho_hat) on sets whose frame operator is not a multiple of I.
    """
    p = np.array([np.vdot(y, rho @ y).real for y in kets])
    mu = n * p
    cols = [mu] + [n * np.array([np.vdot(y, b @ y).real for y in kets]) for b in traceless_basis(rho.shape[0])]
    jac = np.stack(cols, axis=1)
    fisher = jac.T @ (jac / mu[:, None])
    return float(np.sqrt(np.linalg.inv(fisher)[0, 0]))
