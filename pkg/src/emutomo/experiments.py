"""Monte-Carlo runs of the simulated two-photon experiment."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .inversion import linear_invert
from .metrics import fidelity
from .simulation import SimulationSpec, sample_counts
from .solver import SolverConfig, emu_iterate


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    emu_eigenvalues: np.ndarray
    emu_min_eigenvalue: float
    emu_fidelity: float
    emu_stop_reason: str
    inversion_eigenvalues: np.ndarray | None
    inversion_physical: bool | None
    poisson_n: float
    total_counts: float


def run_seed(spec: SimulationSpec, seed: int, cfg: SolverConfig, invert: bool = True) -> SeedOutcome:
    spec = replace(spec, seed=seed)
    data = sample_counts(spec)
    res = emu_iterate(data, spec.measurement_set, cfg)
    inv = linear_invert(data.frequencies, spec.measurement_set) if invert else None
    return SeedOutcome(
        seed=seed,
        emu_eigenvalues=res.eigenvalues,
        emu_min_eigenvalue=float(np.linalg.eigvalsh(res.rho)[0]),
        emu_fidelity=fidelity(res.rho, spec.true_state),
        emu_stop_reason=res.stop_reason,
        inversion_eigenvalues=None if inv is None else inv.eigenvalues,
        inversion_physical=None if inv is None else inv.physical,
        poisson_n=float(res.poisson_n),
        total_counts=data.total,
    )


def _run_seed_args(args):
    return run_seed(*args)


def monte_carlo(spec: SimulationSpec, seeds, cfg: SolverConfig | None = None, jobs: int = 1, invert=True):
    """Run EMU (and optionally linear inversion) on independently seeded data sets."""
    cfg = cfg or SolverConfig(normalization_mode="renormalized")
    tasks = [(spec, int(s), cfg, invert) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_seed_args, tasks))
    return [run_seed(*t) for t in tasks]


def contrast_summary(outcomes) -> dict:
    inv = [o.inversion_physical for o in outcomes if o.inversion_physical is not None]
    return {
        "seeds": len(outcomes),
        "emu_physical_fraction": float(np.mean([o.emu_min_eigenvalue >= -1e-10 for o in outcomes])),
        "inversion_unphysical_fraction": float(np.mean([not p for p in inv])) if inv else None,
        "emu_mean_eigenvalues": np.mean([o.emu_eigenvalues for o in outcomes], axis=0).tolist(),
        "emu_min_fidelity": float(min(o.emu_fidelity for o in outcomes)),
    }
