"""Synthetic two-photon tomography experiments.

Random numbers come from numpy's PCG64 bit generator seeded with the
integer seed of the spec, so counts are reproducible across platforms and
numpy versions that keep the PCG64 stream stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurements import MeasurementSet, tensor
from .operators import as_density_matrix
from .solver import CountData

NOISE_MODELS = ("multinomial", "poisson", "none")


def rotation(angle: float) -> np.ndarray:
    """Real rotation of the H-V polarization plane."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def nominal_bell_state(mixing: float = 0.0, rotation_angles=(0.0, 0.0)) -> np.ndarray:
    """Rank-2 state (1-m)|psi+><psi+| + m|psi-><psi-|.

    ``psi+`` is (|HH> + |VV>)/sqrt2 after rotating each photon's polarization
    by the given angle; ``psi-`` is (|HH> - |VV>)/sqrt2 under the same
    rotation, so the two stay orthogonal and the spectrum is exactly
    (1 - mixing, mixing, 0, 0).
    """
    if not 0.0 <= mixing <= 1.0:
        raise ValueError(f"mixing must lie in [0, 1], got {mixing}")
    u = np.kron(rotation(rotation_angles[0]), rotation(rotation_angles[1]))
    plus = u @ np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    minus = u @ np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
    return (1 - mixing) * np.outer(plus, plus.conj()) + mixing * np.outer(minus, minus.conj())


def _factor_product(ket, tol=1e-9):
    m = np.asarray(ket).reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    if s[1] > tol:
        raise ValueError("projector ket is entangled; misalignment needs a product-state set")
    return u[:, 0] * s[0], vh[0, :]


def misaligned_set(mset: MeasurementSet, angle_a: float, angle_b: float) -> MeasurementSet:
    """Rotate the analyzers of each photon arm by the given angles."""
    if mset.dimension != 4:
        raise ValueError("misaligned_set needs a two-qubit (d = 4) measurement set")
    ra, rb = rotation(angle_a), rotation(angle_b)
    kets = []
    for proj in mset:
        a, b = _factor_product(proj.ket)
        kets.append(tensor(ra @ a, rb @ b))
    return MeasurementSet.from_kets(mset.labels, kets, normalize=True)


@dataclass(frozen=True)
class SimulationSpec:
    """A simulated experiment.

    ``shots`` is the total number of events for multinomial and noise-free
    sampling, and the mean particle number ``n`` (each setting then has mean
    ``n * p_j``) for Poisson sampling.
    """

    true_state: np.ndarray
    measurement_set: MeasurementSet
    shots: float
    noise_model: str = "poisson"
    misalignment: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "true_state", as_density_matrix(self.true_state))
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {NOISE_MODELS}, got {self.noise_model!r}")
        if not self.shots >= 1:
            raise ValueError(f"shots must be at least 1, got {self.shots}")
        if self.noise_model == "multinomial" and int(self.shots) != self.shots:
            raise ValueError("multinomial sampling needs an integer number of shots")
        if not all(np.isfinite(self.misalignment)) or len(self.misalignment) != 2:
            raise ValueError("misalignment must be two finite angles")
        if self.true_state.shape[0] != self.measurement_set.dimension:
            raise ValueError("true state and measurement set dimensions differ")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def born(self) -> np.ndarray:
        mset = self.measurement_set
        if any(self.misalignment):
            mset = misaligned_set(mset, *self.misalignment)
        return np.clip(mset.born(self.true_state), 0.0, None)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_counts(spec: SimulationSpec) -> CountData:
    p = spec.born()
    labels = spec.measurement_set.labels
    if spec.noise_model == "none":
        return CountData(spec.shots * p / p.sum(), labels)
    rng = rng_for(spec.seed)
    if spec.noise_model == "multinomial":
        counts = rng.multinomial(int(spec.shots), p / p.sum())
    else:
        counts = rng.poisson(spec.shots * p)
    if not counts.any():
        raise ValueError("sampled zero events in total; increase shots")
    return CountData(counts.astype(float), labels)


def bell_scenario(
    seed: int = 0,
    total_events: float = 30000,
    mixing: float = 0.038,
    rotation_angles=(0.05, -0.03),
    mset: MeasurementSet | None = None,
) -> SimulationSpec:
    """Near-pure rotated Bell state on the sixteen-setting set with Poisson noise.

    ``total_events`` is the expected number of detections summed over all
    settings; it is converted to the Poisson intensity ``shots``.
    """
    from .measurements import white_measurement_set

    mset = mset or white_measurement_set()
    rho = nominal_bell_state(mixing, rotation_angles)
    n = total_events / mset.born(rho).sum()
    return SimulationSpec(rho, mset, n, "poisson", (0.0, 0.0), seed)
