"""Command-line front end.

Subcommands: generate, perturb, restore, stability-radius, check-passivity,
experiment {table1,table2,table3}.  Exit codes: 0 success, 1 usage or parse
failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import serialization as ser
from .experiments import ExperimentConfig, run_experiment, write_table
from .linalg import NumericalError
from .pencil import (
    build_even_pencil,
    inertia_checks,
    pencil_eigenvalues,
    perturbed_pencil,
    random_structured_perturbation,
)
from .restore import ConvergenceError, full_restoration
from .stability import destabilizing_perturbation, stability_radius
from .systems import (
    descriptor_to_ph,
    ph_to_descriptor,
    popov_eval,
    random_strictly_passive,
    validate_ph,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="phpencil", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded strictly passive system")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-rho", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("perturb", help="write a structurally perturbed even pencil")
    p.add_argument("system")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("restore", help="perturb a system and restore the pencil structure")
    p.add_argument("system")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-15)
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")

    p = sub.add_parser("stability-radius", help="stability radius of the (E, A) pencil")
    p.add_argument("system")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("check-passivity", help="even-pencil passivity diagnostics")
    p.add_argument("system")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("experiment", help="run a seeded table experiment")
    p.add_argument("kind", choices=["table1", "table2", "table3"])
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, default=None, help="replace the seed list")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    return parser


def _load_system(path):
    try:
        return ser.load_system(path)
    except (OSError, json.JSONDecodeError, ser.FormatError, ValueError) as exc:
        raise UsageError(f"cannot read system file {path!r}: {exc}") from exc


def _cmd_generate(args) -> int:
    ph = random_strictly_passive(args.n, args.m, args.seed, target_rho=args.target_rho)
    report = validate_ph(ph)
    if not report.passed:
        print("generated system failed validation", file=sys.stderr)
        return EXIT_NUMERICAL
    ser.save_system(args.out, ph_to_descriptor(ph), ph, seed=args.seed)
    print(f"wrote strictly passive system (n={args.n}, m={args.m}, seed={args.seed}) to {args.out}")
    return EXIT_OK


def _cmd_perturb(args) -> int:
    sys_, _, _ = _load_system(args.system)
    pencil = build_even_pencil(sys_)
    pert = random_structured_perturbation(sys_.n, sys_.m, args.delta, args.seed)
    perturbed = perturbed_pencil(pencil, pert)
    payload = ser.pencil_to_json(
        perturbed.Ecal, perturbed.Acal, sys_.n, sys_.m,
        seed=args.seed, delta=args.delta,
    )
    ser.dump_json(payload, args.out)
    print(f"wrote perturbed even pencil (delta={args.delta:g}, seed={args.seed}) to {args.out}")
    return EXIT_OK


def _restore_report(sys_, result, delta, seed) -> dict:
    errors = result.backward_errors_descriptor
    ph_errors = result.backward_errors_ph
    cert = result.certificate
    return {
        "format_version": ser.FORMAT_VERSION,
        "delta": delta,
        "seed": seed,
        "converged": True,
        "iterations": len(result.residual_history) - 1,
        "residual_history": result.residual_history,
        "Y_norm": result.y_norm,
        "Z": ser.matrix_to_json(result.Z),
        "backward_errors": {
            "descriptor": {
                "dE": ser.matrix_to_json(errors.dE),
                "dA": ser.matrix_to_json(errors.dA),
                "dB": ser.matrix_to_json(errors.dB),
                "dC": ser.matrix_to_json(errors.dC),
                "dD": ser.matrix_to_json(errors.dD),
                "norm": errors.norm(),
            },
            "ph": {
                "dR": ser.matrix_to_json(ph_errors.dR),
                "dJ": ser.matrix_to_json(ph_errors.dJ),
                "dG": ser.matrix_to_json(ph_errors.dG),
                "dP": ser.matrix_to_json(ph_errors.dP),
                "norm": ph_errors.norm(),
            },
        },
        "certificate": {
            "delta": cert.delta,
            "theta": cert.theta,
            "omega_q": cert.omega_q,
            "kappa1": cert.kappa1,
            "solution_bound": cert.solution_bound,
            "precondition_ok": cert.precondition_ok,
        },
    }


def _cmd_restore(args) -> int:
    sys_, _, _ = _load_system(args.system)
    pert = random_structured_perturbation(sys_.n, sys_.m, args.delta, args.seed)
    try:
        result = full_restoration(sys_, pert, max_iter=args.max_iter, tol=args.tol)
    except (ConvergenceError, NumericalError) as exc:
        print(f"restoration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = _restore_report(sys_, result, args.delta, args.seed)
    if args.out:
        ser.dump_json(report, args.out)
    if args.json:
        json.dump(report, sys.stdout, indent=1, sort_keys=True)
        print()
    history = " -> ".join(f"{v:.4e}" for v in result.residual_history)
    print(f"restored pencil structure in {len(result.residual_history) - 1} iterations")
    print(f"residuals: {history}")
    print(f"||Y||_F = {result.y_norm:.6e}")
    print(f"backward errors: descriptor {result.backward_errors_descriptor.norm():.6e}, "
          f"ph {result.backward_errors_ph.norm():.6e}")
    print(f"certificate: delta={result.certificate.delta:.4e} "
          f"kappa1={result.certificate.kappa1:.4e} "
          f"ok={result.certificate.precondition_ok}")
    return EXIT_OK


def _cmd_stability_radius(args) -> int:
    sys_, _, _ = _load_system(args.system)
    res = stability_radius(sys_.E, sys_.A)
    payload = {
        "rho": res.rho,
        "omega_star": None if math.isinf(res.omega_star) else res.omega_star,
        "omega_star_infinite": bool(math.isinf(res.omega_star)),
        "offending_eigenvalue": None
        if res.offending_eigenvalue is None
        else [res.offending_eigenvalue.real, res.offending_eigenvalue.imag],
    }
    if res.offending_eigenvalue is not None:
        print(f"rho = 0: eigenvalue {res.offending_eigenvalue:.6g} on or right of the axis")
        if args.json:
            json.dump(payload, sys.stdout, indent=1, sort_keys=True)
            print()
        return EXIT_OK
    print(f"rho(E, A) = {res.rho:.6e}")
    if math.isinf(res.omega_star):
        print("minimizing frequency: infinite (limit value sigma_min(E))")
        payload["destabilizer_norm"] = None
    else:
        print(f"minimizing frequency omega* = {res.omega_star:.6e}")
        d_e, d_a = destabilizing_perturbation(res)
        norm = math.hypot(np.linalg.norm(d_e), np.linalg.norm(d_a))
        payload["destabilizer_norm"] = norm
        print(f"destabilizer norms: ||dE||={np.linalg.norm(d_e):.6e} "
              f"||dA||={np.linalg.norm(d_a):.6e} combined={norm:.6e}")
    if args.json:
        json.dump(payload, sys.stdout, indent=1, sort_keys=True)
        print()
    return EXIT_OK


def _cmd_check_passivity(args) -> int:
    sys_, _, _ = _load_system(args.system)
    pencil = build_even_pencil(sys_)
    diag = pencil_eigenvalues(pencil)
    grid = np.logspace(-4, 4, 50)
    popov_min = math.inf
    for w in grid:
        eigs = np.linalg.eigvalsh(popov_eval(sys_, w))
        popov_min = min(popov_min, float(eigs[0]))
    checks = {
        "regular": diag.regular,
        "no_imaginary_axis_eigenvalues": diag.regular
        and diag.imaginary_axis_eigenvalues.size == 0,
        "index_at_most_one": diag.index_at_most_one,
        "popov_positive_on_grid": popov_min > 0.0,
    }
    payload = {
        "checks": checks,
        "infinite_count": diag.infinite_count,
        "popov_grid_min_eigenvalue": popov_min,
        "imaginary_axis_eigenvalues": [
            [z.real, z.imag] for z in np.atleast_1d(diag.imaginary_axis_eigenvalues)
        ],
        "passed": all(checks.values()),
    }
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    print(f"infinite eigenvalue count: {diag.infinite_count} (m = {sys_.m})")
    print(f"min Popov eigenvalue on grid: {popov_min:.6e}")
    if args.json:
        json.dump(payload, sys.stdout, indent=1, sort_keys=True)
        print()
    return EXIT_OK if payload["passed"] else EXIT_NUMERICAL


def _cmd_experiment(args) -> int:
    data = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from exc
    if args.seed is not None:
        data["seeds"] = [args.seed]
    if args.n is not None:
        data["n"] = args.n
    if args.m is not None:
        data["m"] = args.m
    try:
        config = ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from exc
    rows = run_experiment(args.kind, config)
    write_table(args.kind, rows, args.out)
    failures = [row for row in rows if row.error]
    print(f"wrote {len(rows)} {args.kind} rows to {args.out} "
          f"(+ sidecar {args.out}.json), {len(failures)} failed")
    for row in failures:
        print(f"  seed={row.seed} delta={row.delta:g}: {row.error}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_NUMERICAL


_DISPATCH = {
    "generate": _cmd_generate,
    "perturb": _cmd_perturb,
    "restore": _cmd_restore,
    "stability-radius": _cmd_stability_radius,
    "check-passivity": _cmd_check_passivity,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
