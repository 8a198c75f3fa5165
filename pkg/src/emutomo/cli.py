"""Command-line interface.

    emutomo reconstruct MEASUREMENTS COUNTS -o REPORT [--reference STATE] ...
    emutomo simulate SPEC -o COUNTS [--seed N]
    emutomo invert MEASUREMENTS COUNTS -o REPORT
    emutomo compare MEASUREMENTS COUNTS -o REPORT
    emutomo compare --spec SPEC --seeds 200 --jobs 4 -o REPORT

Reports go to files; diagnostics go to stderr. Exit codes: 0 success,
1 input error, 2 solver hit --max-iter without converging.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import io
from .experiments import contrast_summary, monte_carlo
from .inversion import InformationallyIncomplete, InversionReport, linear_invert
from .metrics import compare_states, trace_distance
from .simulation import sample_counts
from .solver import MODES, ReconstructionResult, SolverConfig, SolverError, emu_iterate

log = logging.getLogger("emutomo")

EXIT_OK, EXIT_INPUT, EXIT_MAX_ITER = 0, 1, 2


def _floats(xs):
    return [float(x) for x in np.asarray(xs).ravel()]


def result_to_json(res: ReconstructionResult) -> dict:
    return {
        "rho": io.matrix_to_json(res.rho),
        "eigenvalues": _floats(res.eigenvalues),
        "eigenvectors": [io.vector_to_json(v) for v in res.eigenvectors.T],
        "physical": bool(np.linalg.eigvalsh(res.rho)[0] >= -1e-10),
        "log_likelihood_trace": _floats(res.log_likelihood_trace),
        "residual_trace": _floats(res.residual_trace),
        "final_residual": float(res.final_residual),
        "iterations": int(res.iterations),
        "converged": bool(res.converged),
        "stop_reason": res.stop_reason,
        "poisson_n": None if res.poisson_n is None else float(res.poisson_n),
        "diagnostics": res.diagnostics,
    }


def inversion_to_json(rep: InversionReport) -> dict:
    return {
        "matrix": io.matrix_to_json(rep.matrix),
        "eigenvalues": _floats(rep.eigenvalues),
        "min_eigenvalue": rep.min_eigenvalue,
        "physical": rep.physical,
        "residual": rep.residual,
        "rank": rep.rank,
    }


def comparison_to_json(estimate, reference) -> dict:
    m = compare_states(estimate, reference)
    return {
        "fidelity": m.fidelity,
        "trace_distance": m.trace_distance,
        "eigenvalues_estimate": _floats(m.eigenvalues_estimate),
        "eigenvalues_reference": _floats(m.eigenvalues_reference),
        "eigenvalue_gaps": _floats(m.eigenvalue_gaps),
    }


def _config(args) -> SolverConfig:
    return SolverConfig(
        eps0=args.eps0,
        max_iter=args.max_iter,
        fixed_point_tol=args.fixed_point_tol,
        likelihood_tol=args.likelihood_tol,
        normalization_mode=args.mode,
        em_extrapolation=not args.plain_em,
    )


def _load_inputs(args):
    mset = io.load_measurement_set(args.measurements)
    data = io.align_counts(io.load_counts(args.counts), mset, str(args.counts))
    return mset, data


def _report(command, paths, t0, **sections):
    doc = {"command": command, "inputs": [io.file_digest(p) for p in paths if p]}
    doc.update(sections)
    doc["duration_seconds"] = time.perf_counter() - t0
    return doc


def cmd_reconstruct(args) -> int:
    t0 = time.perf_counter()
    cfg = _config(args)
    mset, data = _load_inputs(args)
    reference = io.load_state(args.reference) if args.reference else None
    res = emu_iterate(data, mset, cfg)
    doc = _report(
        "reconstruct",
        [args.measurements, args.counts, args.reference],
        t0,
        config=asdict(cfg),
        emu=result_to_json(res),
    )
    if reference is not None:
        doc["comparison"] = comparison_to_json(res.rho, reference)
        doc["duration_seconds"] = time.perf_counter() - t0
    io.write_json(args.out, doc)
    log.info("reconstruct: %s after %d iterations, residual %.3e", res.stop_reason, res.iterations, res.final_residual)
    return EXIT_MAX_ITER if res.stop_reason == "max_iter" else EXIT_OK


def cmd_simulate(args) -> int:
    spec = io.load_simulation_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    data = sample_counts(spec)
    io.write_json(args.out, io.counts_to_json(data))
    log.info("simulate: wrote %d settings, %.6g events", data.counts.size, data.total)
    return EXIT_OK


def cmd_invert(args) -> int:
    t0 = time.perf_counter()
    mset, data = _load_inputs(args)
    rep = linear_invert(data.frequencies, mset)
    io.write_json(args.out, _report("invert", [args.measurements, args.counts], t0, inversion=inversion_to_json(rep)))
    return EXIT_OK


def cmd_compare(args) -> int:
    t0 = time.perf_counter()
    cfg = _config(args)
    if args.spec:
        spec = io.load_simulation_spec(args.spec)
        outcomes = monte_carlo(spec, range(args.seed or 0, (args.seed or 0) + args.seeds), cfg, args.jobs)
        summary = contrast_summary(outcomes)
        doc = _report("compare", [args.spec], t0, config=asdict(cfg), monte_carlo=summary)
        io.write_json(args.out, doc)
        log.info(
            "compare: inversion unphysical in %.1f%% of %d seeds, EMU physical in %.1f%%",
            100 * summary["inversion_unphysical_fraction"],
            summary["seeds"],
            100 * summary["emu_physical_fraction"],
        )
        return EXIT_OK
    if not (args.measurements and args.counts):
        raise io.InputError("compare needs MEASUREMENTS and COUNTS, or --spec")
    mset, data = _load_inputs(args)
    rep = linear_invert(data.frequencies, mset)
    res = emu_iterate(data, mset, cfg)
    emu = result_to_json(res)
    doc = _report(
        "compare",
        [args.measurements, args.counts],
        t0,
        config=asdict(cfg),
        emu=emu,
        inversion=inversion_to_json(rep),
        contrast={
            "emu_eigenvalues": emu["eigenvalues"],
            "inversion_eigenvalues": _floats(rep.eigenvalues),
            "emu_physical": emu["physical"],
            "inversion_physical": rep.physical,
            "trace_distance": trace_distance(res.rho, rep.matrix),
        },
    )
    io.write_json(args.out, doc)
    return EXIT_MAX_ITER if res.stop_reason == "max_iter" else EXIT_OK


def _add_solver_flags(p):
    d = SolverConfig()
    p.add_argument("--eps0", type=float, default=d.eps0, help="initial rotation step")
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--fixed-point-tol", type=float, default=d.fixed_point_tol)
    p.add_argument("--likelihood-tol", type=float, default=d.likelihood_tol)
    p.add_argument("--mode", choices=MODES, default=d.normalization_mode,
                   help=f"likelihood normalization (default: {d.normalization_mode})")
    p.add_argument("--plain-em", action="store_true", help="disable extrapolation of the EM step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emutomo", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="maximum-likelihood reconstruction")
    p.add_argument("measurements")
    p.add_argument("counts")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--reference", help="state file to compare the estimate against")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("simulate", help="sample counts from a simulation spec")
    p.add_argument("spec")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, help="override the seed in the spec")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invert", help="direct linear inversion")
    p.add_argument("measurements")
    p.add_argument("counts")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("compare", help="EMU and linear inversion side by side")
    p.add_argument("measurements", nargs="?")
    p.add_argument("counts", nargs="?")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--spec", help="simulation spec for a Monte-Carlo comparison")
    p.add_argument("--seeds", type=int, default=200, help="number of Monte-Carlo seeds")
    p.add_argument("--seed", type=int, help="first Monte-Carlo seed (default 0)")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (io.InputError, InformationallyIncomplete, SolverError, ValueError) as e:
        print(f"emutomo {args.command}: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
