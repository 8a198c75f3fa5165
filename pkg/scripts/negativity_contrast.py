"""How often linear inversion is unphysical at low counts, next to EMU."""

import argparse

import numpy as np

from emutomo.experiments import contrast_summary, monte_carlo
from emutomo.simulation import bell_scenario
from emutomo.solver import SolverConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--per-setting", type=float, nargs="+", default=[100, 500, 2000, 10000])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    print(f"{'per setting':>11} {'inv unphys':>10} {'median min eig':>14} {'emu phys':>9}")
    for k in args.per_setting:
        spec = bell_scenario(total_events=16 * k)
        out = monte_carlo(spec, range(args.seeds), SolverConfig(), jobs=args.jobs)
        s = contrast_summary(out)
        med = np.median([o.inversion_eigenvalues[-1] for o in out])
        print(f"{k:11.0f} {s['inversion_unphysical_fraction']:10.0%} {med:14.4f} {s['emu_physical_fraction']:9.0%}")


if __name__ == "__main__":
    main()
