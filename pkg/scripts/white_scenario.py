"""Pass rate of EMU on the simulated near-Bell scenario versus total events.

A seed passes when the reconstruction has exactly two eigenvalues above 1e-3,
the largest lies in [0.94, 0.98], and the fidelity to the truth is >= 0.99.
"""

import argparse
import time

import numpy as np

from emutomo.experiments import monte_carlo
from emutomo.simulation import bell_scenario
from emutomo.solver import SolverConfig


def passes(o):
    ev = o.emu_eigenvalues
    return int(np.sum(ev > 1e-3)) == 2 and 0.94 <= ev[0] <= 0.98 and o.emu_fidelity >= 0.99


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--events", type=float, nargs="+", default=[30000, 100000, 300000])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    print(f"{'events':>9} {'pass':>6} {'lam1 mean':>10} {'lam1 sd':>8} {'rank2':>6} {'F min':>7} {'time':>6}")
    for n in args.events:
        t0 = time.perf_counter()
        out = monte_carlo(bell_scenario(total_events=n), range(args.seeds), SolverConfig(), jobs=args.jobs, invert=False)
        lam = np.array([o.emu_eigenvalues[0] for o in out])
        rank2 = np.mean([int(np.sum(o.emu_eigenvalues > 1e-3)) == 2 for o in out])
        rate = np.mean([passes(o) for o in out])
        fmin = min(o.emu_fidelity for o in out)
        print(f"{n:9.0f} {rate:6.0%} {lam.mean():10.4f} {lam.std():8.4f} {rank2:6.0%} {fmin:7.4f} "
              f"{time.perf_counter() - t0:5.0f}s")


if __name__ == "__main__":
    main()
