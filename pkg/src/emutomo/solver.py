"""Maximum-likelihood state reconstruction by alternating EM and unitary steps.

Each iteration keeps the density matrix in its spectral form
``rho = sum_k r_k |phi_k><phi_k|``. With the eigenbasis frozen the Born rule is
a linear, positive map of the eigenvalues ``r``, so they are updated with the
multiplicative EM rule. The eigenbasis is then rotated by
``U = exp(i*eps*G)`` with ``G = i[rho, R]``, the steepest-ascent generator of
the log-likelihood, where ``R = sum_j f_j/p_j |y_j><y_j|``. The step ``eps`` is
found by backtracking so that neither half of the iteration can lower the
likelihood.

Two likelihoods are supported:

``complete``
    ``sum_j f_j ln p_j`` with the raw Born probabilities. Appropriate when the
    projectors resolve the identity (or a multiple of it).
``renormalized``
    ``sum_j f_j ln(p_j / sum_i p_i)``. Needed when the projectors do not sum
    to a multiple of the identity; equivalent to a Poisson model in which the
    unknown mean particle number has been profiled out.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .measurements import MeasurementSet, frame_operator
from .operators import (
    as_density_matrix,
    commutator,
    eig_hermitian,
    inv_sqrt_psd,
    sqrt_psd,
    unitary_from_generator,
)

log = logging.getLogger(__name__)

MODES = ("complete", "renormalized")
EIGENVALUE_FLOOR = 1e-15
MAX_BACKTRACKS = 40
# the likelihood-stall test looks back this many iterations
STALL_WINDOW = 100
STALL_RESIDUAL_PROGRESS = 0.9
SCALAR_FRAME_ATOL = 1e-12
EXTRAPOLATION_MARGIN = 1e-14


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class CountData:
    """Observed event counts, one per projector of a measurement set.

    Counts may be real-valued (noise-free "expected" counts are allowed).
    """

    counts: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float).ravel()
        if np.any(~np.isfinite(counts)) or np.any(counts < 0):
            raise ValueError("counts must be finite and nonnegative")
        if not np.any(counts > 0):
            raise ValueError("at least one count must be positive")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != counts.size:
                raise ValueError(f"{len(labels)} labels for {counts.size} counts")
            object.__setattr__(self, "labels", labels)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_frequencies(cls, freqs, labels=None):
        return cls(np.asarray(freqs, dtype=float), labels)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def aligned_to(self, mset: MeasurementSet) -> "CountData":
        """Reorder to match ``mset`` by label; unlabeled data must already match in length."""
        if self.labels is None:
            if self.counts.size != len(mset):
                raise ValueError(f"{self.counts.size} counts for {len(mset)} projectors")
            return CountData(self.counts, mset.labels)
        lookup = dict(zip(self.labels, self.counts))
        unknown = [lab for lab in self.labels if lab not in set(mset.labels)]
        if unknown:
            raise ValueError(f"count label {unknown[0]!r} is not in the measurement set")
        missing = [lab for lab in mset.labels if lab not in lookup]
        if missing:
            raise ValueError(f"no count given for projector {missing[0]!r}")
        if len(lookup) != len(self.labels):
            raise ValueError("duplicate labels in count data")
        return CountData(np.array([lookup[lab] for lab in mset.labels]), mset.labels)


@dataclass(frozen=True)
class SolverConfig:
    eps0: float = 10.0
    backtrack_factor: float = 0.5
    em_substeps: int = 1
    max_iter: int = 10000
    fixed_point_tol: float = 1e-8
    likelihood_tol: float = 1e-12
    prob_floor: float = 1e-12
    normalization_mode: str = "renormalized"
    # extrapolate along the EM direction when it beats the plain EM point
    em_extrapolation: bool = True

    def __post_init__(self):
        if self.normalization_mode not in MODES:
            raise ValueError(f"normalization_mode must be one of {MODES}")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        for name in ("eps0", "fixed_point_tol", "likelihood_tol", "prob_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.em_substeps < 1 or self.max_iter < 1:
            raise ValueError("em_substeps and max_iter must be positive integers")


@dataclass
class ReconstructionResult:
    rho: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    log_likelihood_trace: list[float]
    residual_trace: list[float]
    final_residual: float
    iterations: int
    converged: bool
    stop_reason: str
    poisson_n: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def log_likelihood(self) -> float:
        return self.log_likelihood_trace[-1]


def probabilities(rho, mset: MeasurementSet, mode: str = "complete") -> np.ndarray:
    """Born probabilities of every projector, optionally renormalized to sum to one."""
    p = np.clip(mset.born(rho), 0.0, None)
    if mode == "complete":
        return p
    if mode != "renormalized":
        raise ValueError(f"unknown normalization mode {mode!r}")
    total = p.sum()
    if total <= 0:
        raise SolverError("state is orthogonal to every projector; probabilities sum to zero")
    return p / total


def log_likelihood(f, p, prob_floor: float = 1e-12) -> float:
    """sum_j f_j ln p_j; outcomes with f_j = 0 contribute nothing."""
    f = np.asarray(f, dtype=float)
    p = np.asarray(p, dtype=float)
    seen = f > 0
    return float(np.dot(f[seen], np.log(np.maximum(p[seen], prob_floor))))


def r_operator(f, p, mset: MeasurementSet, prob_floor: float = 1e-12) -> np.ndarray:
    """R = sum_j (f_j / p_j) |y_j><y_j|."""
    ratio = np.asarray(f, dtype=float) / np.maximum(np.asarray(p, dtype=float), prob_floor)
    return mset.weighted_sum(ratio)


def kernel(eigenvectors, mset: MeasurementSet) -> np.ndarray:
    """h[j, k] = |<y_j|phi_k>|**2 for eigenvectors stored as columns."""
    return np.abs(mset.kets.conj() @ eigenvectors) ** 2


def em_step(r, f, h_kernel, sensitivity=None, prob_floor: float = 1e-12) -> np.ndarray:
    """One multiplicative EM update of the eigenvalues, renormalized to sum to one.

    Args:
        r: current eigenvalues, strictly positive.
        f: observed frequencies.
        h_kernel: ``(M, d)`` matrix of overlaps ``|<y_j|phi_k>|**2``.
        sensitivity: optional per-eigenvector detection weights
            ``sum_j h[j, k]``. Pass it when maximizing the renormalized
            likelihood; without it the update targets the complete one.
    """
    r = np.asarray(r, dtype=float)
    h = np.asarray(h_kernel, dtype=float)
    p = np.maximum(h @ r, prob_floor)
    new = r * (h.T @ (np.asarray(f, dtype=float) / p))
    if sensitivity is not None:
        new = new / np.asarray(sensitivity, dtype=float)
    new = np.clip(new, 0.0, None)
    return new / new.sum()


def extrapolate_em(r_old, r_em, loglik, max_factor: float = 64.0) -> np.ndarray:
    """Step further along the EM direction when that raises the likelihood.

    Trial points ``r_old + t (r_em - r_old)`` for ``t = max_factor, ..., 2``
    (halving, capped so every eigenvalue stays positive) are compared against
    the plain EM point; the first one that beats it by ``EXTRAPOLATION_MARGIN``
    (absolute, as frequencies are normalized) is returned, so the likelihood never drops
    below the EM value.
    """
    step = r_em - r_old
    neg = step < 0
    t_max = max_factor
    if neg.any():
        t_max = min(t_max, 0.5 * float(np.min(r_old[neg] / -step[neg])))
    ll_em = loglik(r_em)
    # a clear margin keeps the choice stable under round-off in ``loglik``
    target = ll_em + EXTRAPOLATION_MARGIN
    t = t_max
    while t > 1.5:
        trial = r_old + t * step
        trial = trial / trial.sum()
        if loglik(trial) > target:
            return trial
        t *= 0.5
    return r_em


def rotate_basis(rho, r_op, eps: float) -> np.ndarray:
    """U rho U^dagger with U = exp(i eps G), G = i[rho, R]."""
    g = 1j * commutator(rho, r_op)
    u = unitary_from_generator(g, eps)
    return u @ rho @ u.conj().T


def extremal_residual(rho, r_eff) -> float:
    """Frobenius norm of R rho - rho; zero at a likelihood maximum."""
    rho = np.asarray(rho)
    return float(np.linalg.norm(np.asarray(r_eff) @ rho - rho))


def renormalized_operators(r_op, mset: MeasurementSet, p) -> tuple[np.ndarray, np.ndarray]:
    """(R', H') with H' = H / sum(p) and R' = H'^(-1/2) R H'^(-1/2).

    ``p`` are the raw (unnormalized) Born probabilities.
    """
    total = float(np.sum(p))
    if total <= 0:
        raise SolverError("probabilities sum to zero")
    h_prime = frame_operator(mset).matrix / total
    _check_spanning(h_prime)
    m = inv_sqrt_psd(h_prime)
    return m @ r_op @ m, h_prime


def renormalized_state(rho, h_prime) -> np.ndarray:
    """rho' = H'^(1/2) rho H'^(1/2), the state the renormalized extremal equation acts on."""
    s = sqrt_psd(h_prime)
    return s @ rho @ s


def _check_spanning(h):
    vals = np.linalg.eigvalsh(h)
    if vals[0] <= 1e-12 * vals[-1]:
        raise SolverError(
            "measurement does not span space: frame operator is singular, "
            "renormalized mode is undefined"
        )


def poisson_scale(counts, p) -> float:
    """Estimated mean particle number sum(n) / sum(p)."""
    total_p = float(np.sum(p))
    if total_p <= 0:
        raise SolverError("probabilities sum to zero")
    return float(np.sum(counts)) / total_p


class _Problem:
    """Per-run constants and the mode-dependent pieces of the objective."""

    def __init__(self, data: CountData, mset: MeasurementSet, cfg: SolverConfig):
        self.mset = mset
        self.cfg = cfg
        self.f = data.frequencies
        self.renormalized = cfg.normalization_mode == "renormalized"
        self.frame = frame_operator(mset).matrix
        # H = c I makes sum(p) = c for every state, so the constant is used as is
        self.scalar_frame = None
        d = mset.dimension
        c = np.trace(self.frame).real / d
        if np.max(np.abs(self.frame - c * np.eye(d))) <= SCALAR_FRAME_ATOL * c:
            self.scalar_frame = c
        if self.renormalized:
            _check_spanning(self.frame)
            self.frame_isqrt = inv_sqrt_psd(self.frame)
            self.frame_sqrt = sqrt_psd(self.frame)

    def born(self, rho):
        p = np.clip(self.mset.born(rho), 0.0, None)
        if p.sum() <= 0:
            raise SolverError("current state is orthogonal to every projector")
        return p

    @property
    def exact_renormalization(self) -> bool:
        return self.renormalized and self.scalar_frame is not None

    @property
    def offset(self) -> float:
        """Constant added to ``loglik`` values before they are reported."""
        return -float(np.log(self.scalar_frame)) if self.exact_renormalization else 0.0

    def loglik(self, p) -> float:
        # for H = c I the constant -ln c is left out, so comparisons match complete mode
        if self.renormalized and not self.exact_renormalization:
            p = p / p.sum()
        return log_likelihood(self.f, p, self.cfg.prob_floor)

    def sensitivity(self, h):
        # uniform sensitivities cancel in the EM normalization
        if self.renormalized and not self.exact_renormalization:
            return h.sum(axis=0)
        return None

    def r_op(self, p):
        return r_operator(self.f, p, self.mset, self.cfg.prob_floor)

    def ascent_operator(self, r_op, p):
        # gradient of the log-likelihood with respect to rho
        if self.renormalized and not self.exact_renormalization:
            return r_op - self.frame / p.sum()
        # a multiple of the identity does not change the commutator
        return r_op

    def effective_pair(self, rho, r_op, p):
        """(R_eff, rho_eff) for the extremal equation R_eff rho_eff = rho_eff."""
        if not self.renormalized or self.exact_renormalization:
            # for H = c I: R' = (c / c) R and rho' = rho
            return r_op, rho
        total = p.sum()
        r_eff = total * (self.frame_isqrt @ r_op @ self.frame_isqrt)
        rho_eff = (self.frame_sqrt @ rho @ self.frame_sqrt) / total
        return r_eff, rho_eff

    def residual(self, rho, p) -> float:
        r_eff, rho_eff = self.effective_pair(rho, self.r_op(p), p)
        return extremal_residual(rho_eff, r_eff)


def _stalled(ll_trace, res_trace, tol: float) -> bool:
    """Likelihood-stall test over the last ``STALL_WINDOW`` iterations.

    Stops only when the mean relative gain per iteration is at most ``tol``
    and the best residual has not improved by ``STALL_RESIDUAL_PROGRESS``
    over the window. A per-step gain test alone stops too early while the
    iteration still contracts geometrically (tiny gains, residual falling),
    and the gains alone cannot tell that phase from a flat creep.
    """
    w = STALL_WINDOW
    if len(ll_trace) <= w:
        return False
    gain = ll_trace[-1] - ll_trace[-1 - w]
    if gain > w * tol * abs(ll_trace[-1]):
        return False
    return min(res_trace[-w:]) > STALL_RESIDUAL_PROGRESS * min(res_trace[:-w])


def _assemble(r, phi):
    return (phi * r[None, :]) @ phi.conj().T


def emu_iterate(
    data: CountData,
    mset: MeasurementSet,
    cfg: SolverConfig | None = None,
    rho0=None,
    callback=None,
) -> ReconstructionResult:
    """Reconstruct the maximum-likelihood density matrix.

    Args:
        data: counts aligned with ``mset`` (see ``CountData.aligned_to``).
        mset: the measured projectors.
        cfg: solver settings; defaults to ``SolverConfig()``.
        rho0: strictly positive starting state, maximally mixed by default.
        callback: called as ``callback(iteration, rho)`` after every iteration.

    Returns:
        ReconstructionResult. ``converged`` is true only when the extremal
        residual fell below ``fixed_point_tol``; a likelihood stall stops the
        loop with ``stop_reason == "likelihood"`` but leaves ``converged`` false.
        See ``_stalled`` for the stall test.
    """
    cfg = cfg or SolverConfig()
    if data.counts.size != len(mset):
        raise ValueError(f"{data.counts.size} counts for {len(mset)} projectors")
    prob = _Problem(data, mset, cfg)
    d = mset.dimension

    if rho0 is None:
        rho0 = np.eye(d, dtype=complex) / d
    rho0 = as_density_matrix(rho0)
    vals, phi = eig_hermitian(rho0)
    if vals[0] <= 0:
        raise ValueError("initial state must be strictly positive definite")
    r = vals / vals.sum()

    rho = _assemble(r, phi)
    p = prob.born(rho)
    ll_trace = [prob.loglik(p)]
    res_trace = [prob.residual(rho, p)]
    diag = {"floor_events": 0, "eigenvalue_floor_events": 0, "rotation_rejections": 0}
    nonzero = np.count_nonzero(data.counts)
    if nonzero == 1:
        diag["degenerate_data"] = "all counts fall on a single projector; the estimate lies on the boundary"

    f = prob.f
    stop_reason = "max_iter"
    converged = False
    if res_trace[0] <= cfg.fixed_point_tol:
        stop_reason, converged = "residual", True
    it = 0
    eps_last = cfg.eps0
    while not converged and it < cfg.max_iter:
        it += 1
        low = r < EIGENVALUE_FLOOR
        if low.any():
            diag["eigenvalue_floor_events"] += int(low.sum())
            r = np.maximum(r, EIGENVALUE_FLOOR)
            r = r / r.sum()

        h = kernel(phi, mset)
        sens = prob.sensitivity(h)
        r_start = r
        for _ in range(cfg.em_substeps):
            diag["floor_events"] += int(np.count_nonzero(h @ r < cfg.prob_floor))
            r = em_step(r, f, h, sens, cfg.prob_floor)
        if cfg.em_extrapolation:
            r = extrapolate_em(r_start, r, lambda x: prob.loglik(np.clip(h @ x, 0.0, None)))

        rho = _assemble(r, phi)
        p = prob.born(rho)
        ll_em = prob.loglik(p)

        grad = prob.ascent_operator(prob.r_op(p), p)
        gen = 1j * commutator(rho, grad)
        g_vals, g_vecs = np.linalg.eigh(0.5 * (gen + gen.conj().T))
        # start from eps0, or from one step above the last accepted size if that is larger
        eps = max(cfg.eps0, eps_last / cfg.backtrack_factor)
        accepted = False
        if np.max(np.abs(g_vals)) > 0:
            for _ in range(MAX_BACKTRACKS):
                u = (g_vecs * np.exp(1j * eps * g_vals)[None, :]) @ g_vecs.conj().T
                phi_try = u @ phi
                rho_try = _assemble(r, phi_try)
                p_try = prob.born(rho_try)
                ll_try = prob.loglik(p_try)
                if ll_try >= ll_em:
                    accepted = True
                    eps_last = eps
                    break
                eps *= cfg.backtrack_factor
        if accepted:
            # re-orthonormalize against round-off drift; column phases are irrelevant
            phi, _ = np.linalg.qr(phi_try)
            rho, p, ll_new = _assemble(r, phi), p_try, ll_try
        else:
            diag["rotation_rejections"] += 1
            ll_new = ll_em

        ll_trace.append(ll_new)
        res = prob.residual(rho, p)
        res_trace.append(res)
        if callback is not None:
            callback(it, rho)

        if res <= cfg.fixed_point_tol:
            stop_reason, converged = "residual", True
        elif _stalled(ll_trace, res_trace, cfg.likelihood_tol):
            stop_reason = "likelihood"
            break

    order = np.argsort(r)[::-1]
    r, phi = r[order], phi[:, order]
    vals, vecs = eig_hermitian(_assemble(r, phi))
    rho = _assemble(r, phi)
    p_final = prob.born(rho)
    result = ReconstructionResult(
        rho=0.5 * (rho + rho.conj().T),
        eigenvalues=vals[::-1].copy(),
        eigenvectors=vecs[:, ::-1].copy(),
        log_likelihood_trace=[v + prob.offset for v in ll_trace],
        residual_trace=res_trace,
        final_residual=res_trace[-1],
        iterations=it,
        converged=converged,
        stop_reason=stop_reason,
        poisson_n=poisson_scale(data.counts, p_final),
        diagnostics=diag,
    )
    log.debug("emu_iterate stopped after %d iterations (%s)", it, stop_reason)
    return result
