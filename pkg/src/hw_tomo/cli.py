"""hw-tomo command line: simulate, reconstruct, observables, compile, verify-optics.

Every report embeds the fully resolved configuration (including the seed),
so any sampled run can be replayed to byte-identical numbers.  Exit codes:
0 success, 1 validation failure, 2 internal invariant breach.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path

from . import hw_basis, optics, serialize, tomography
from .errors import InternalError, ValidationError


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; bad usage is a validation
    # failure here, so route it through the shared error path instead.
    def error(self, message):
        raise ValidationError(message)


def _worker_count() -> int:
    raw = os.environ.get("HW_TOMO_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"HW_TOMO_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"HW_TOMO_THREADS must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hw-tomo", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    obs = sub.add_parser("observables", help="dump one or all Q_lm matrices")
    obs.add_argument("--d", type=int, required=True)
    obs.add_argument("--l", type=int, default=None)
    obs.add_argument("--m", type=int, default=None)
    obs.add_argument("--out", type=Path, required=True)

    sim = sub.add_parser("simulate", help="run tomography on a known input state")
    sim.add_argument(
        "--state",
        required=True,
        help="state JSON file, or preset:maximally_mixed | preset:basis:<j> | preset:fourier:<j>",
    )
    sim.add_argument("--d", type=int, default=None, help="dimension (required for presets)")
    sim.add_argument("--shots", type=int, default=0, help="shots per setting; 0 = exact")
    sim.add_argument("--seed", type=int, default=None, help="master seed for sampled runs")
    sim.add_argument("--out", type=Path, required=True, help="report JSON path")
    sim.add_argument("--coeffs-out", type=Path, default=None, help="also write the coefficient table (JSON + CSV)")
    sim.add_argument("--no-pin-trace", action="store_true", help="sample the (0,0) setting instead of pinning <Q_00> = 1")
    sim.add_argument("--no-project", action="store_true", help="skip the PSD projection step")

    rec = sub.add_parser("reconstruct", help="rebuild a state from a coefficient table")
    rec.add_argument("--coeffs", type=Path, required=True)
    rec.add_argument("--out", type=Path, required=True)
    rec.add_argument("--no-project", action="store_true")

    comp = sub.add_parser("compile", help="compile one Z^l X^m setting to optical elements")
    comp.add_argument("--d", type=int, required=True)
    comp.add_argument("--l", type=int, required=True)
    comp.add_argument("--m", type=int, required=True)
    comp.add_argument("--layout", choices=["serial", "parallel"], default="parallel")
    comp.add_argument("--out", type=Path, required=True)

    ver = sub.add_parser("verify-optics", help="check compiled plans against their gates")
    ver.add_argument("--d", type=int, required=True)
    ver.add_argument("--all", action="store_true", help="verify every (l, m) setting")
    ver.add_argument("--l", type=int, default=None)
    ver.add_argument("--m", type=int, default=None)
    ver.add_argument("--out", type=Path, required=True)

    return parser


def _cmd_observables(args) -> int:
    if (args.l is None) != (args.m is None):
        raise ValidationError("--l and --m must be given together")
    if args.l is not None:
        items = [hw_basis.hw_observable(args.d, args.l, args.m)]
    else:
        items = [
            hw_basis.hw_observable(args.d, l, m)
            for l in range(args.d)
            for m in range(args.d)
        ]
    payload = serialize.observables_to_payload(args.d, items)
    serialize.write_json(args.out, payload, "observables")
    print(f"wrote {len(items)} observable(s) to {args.out}")
    return 0


def _resolve_cli_state(args) -> tuple:
    if args.state.startswith("preset:"):
        if args.d is None:
            raise ValidationError("presets need an explicit --d")
        preset = args.state[len("preset:"):]
        rho = serialize.state_from_preset(args.d, preset)
        resolved = {"d": args.d, "kind": "preset", "preset": preset}
        return rho, resolved
    rho, resolved = serialize.load_state(args.state)
    if args.d is not None and args.d != rho.dim:
        raise ValidationError(f"--d {args.d} conflicts with state file dimension {rho.dim}")
    return rho, resolved


def _cmd_simulate(args) -> int:
    rho, resolved_state = _resolve_cli_state(args)
    if args.shots < 0:
        raise ValidationError(f"--shots must be >= 0, got {args.shots}")
    seed = args.seed
    if args.shots > 0 and seed is None:
        seed = secrets.randbits(63)
        print(f"no --seed given; using auto-generated seed {seed}", file=sys.stderr)
    workers = _worker_count()
    pin_trace = not args.no_pin_trace
    project = not args.no_project
    config = {
        "subcommand": "simulate",
        "d": rho.dim,
        "state": resolved_state,
        "shots": args.shots,
        "seed": seed if args.shots > 0 else None,
        "pin_trace": pin_trace,
        "project": project,
        "workers": workers,
    }
    report = tomography.run_tomography(
        rho,
        shots=args.shots,
        master_seed=seed,
        pin_trace=pin_trace,
        project=project,
        n_workers=workers,
    )
    serialize.write_json(args.out, serialize.report_to_payload(report, config), "report")
    if args.coeffs_out is not None:
        serialize.write_json(
            args.coeffs_out, serialize.coefficients_to_payload(report.coefficients), "coefficients"
        )
        serialize.write_coefficients_csv(report.coefficients, args.coeffs_out.with_suffix(".csv"))
    if report.metrics is not None:
        print(
            f"d={rho.dim} mode={report.coefficients.mode} "
            f"fidelity={report.metrics.fidelity:.6f} "
            f"frobenius={report.metrics.frobenius_distance:.3e}"
        )
    print(f"wrote report to {args.out}")
    return 0


def _cmd_reconstruct(args) -> int:
    table = serialize.load_coefficients(args.coeffs)
    project = not args.no_project
    config = {
        "subcommand": "reconstruct",
        "d": table.d,
        "project": project,
    }
    report = tomography.reconstruct_from_table(table, project=project)
    serialize.write_json(args.out, serialize.report_to_payload(report, config), "report")
    print(f"wrote report to {args.out}")
    return 0


def _cmd_compile(args) -> int:
    plan = optics.compile_zlxm(args.d, args.l, args.m, layout=args.layout)
    serialize.write_json(args.out, serialize.plan_to_payload(plan), "plan")
    print(
        f"compiled Z^{args.l} X^{args.m} (d={args.d}, {args.layout}): "
        f"{len(plan.elements)} elements, resources {plan.resources}"
    )
    return 0


def _cmd_verify_optics(args) -> int:
    if args.all == (args.l is not None or args.m is not None):
        raise ValidationError("give either --all or both --l and --m")
    if args.all:
        targets = [(l, m) for l in range(args.d) for m in range(args.d)]
    else:
        if args.l is None or args.m is None:
            raise ValidationError("--l and --m must be given together")
        targets = [(args.l, args.m)]
    verdicts = []
    for l, m in targets:
        verdicts.append(optics.verify_gate_equivalence(args.d, l, m, layout="parallel"))
        if m > 0:  # serial layout only differs when there is an X stage
            verdicts.append(optics.verify_gate_equivalence(args.d, l, m, layout="serial"))
    payload = serialize.verdicts_to_payload(args.d, verdicts)
    serialize.write_json(args.out, payload, "verdict")
    n_pass = sum(1 for r in payload["results"] if r["pass"])
    print(f"{n_pass}/{len(payload['results'])} settings passed; verdict written to {args.out}")
    return 0 if payload["all_pass"] else 2


_COMMANDS = {
    "observables": _cmd_observables,
    "simulate": _cmd_simulate,
    "reconstruct": _cmd_reconstruct,
    "compile": _cmd_compile,
    "verify-optics": _cmd_verify_optics,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.subcommand](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
