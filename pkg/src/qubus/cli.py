"""Command-line driver: simulate, sweep, compare, verify.

Exit codes: 0 on success, 1 on input errors (bad flags, missing
parameters, unreadable files), 2 on numerical or verification failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import QubusError
from .protocols import GateSequence, Provenance
from .sweeps import (
    Metric,
    SweepConfig,
    build_protocol,
    compare_methods,
    run_simulation,
    run_sweep,
    verify_oracle,
)

_PROTOCOL_NAMES = {
    "specific": Provenance.SPECIFIC_EXAMPLE,
    "square": Provenance.SQUARE_PATH,
    "geometric": Provenance.GEOMETRIC_GENERAL,
    "custom": Provenance.CUSTOM,
}

_REQUIRED_PARAMS = {
    Provenance.SPECIFIC_EXAMPLE: ("alpha", "beta", "theta", "phi"),
    Provenance.SQUARE_PATH: ("alpha", "theta"),
    Provenance.GEOMETRIC_GENERAL: ("alpha", "theta", "phi", "omega_re", "omega_im"),
}


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad input; the CLI contract wants 1."""

    def error(self, message):
        raise _InputError(message)


def _add_protocol_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--protocol", choices=sorted(_PROTOCOL_NAMES), required=True)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--phi", type=float)
    parser.add_argument("--omega-re", type=float, dest="omega_re")
    parser.add_argument("--omega-im", type=float, dest="omega_im")


def _add_output_flags(parser: argparse.ArgumentParser, default_format: str) -> None:
    parser.add_argument("--out", type=Path, help="write output here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> _Parser:
    parser = _Parser(prog="qubus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one protocol and report gate metrics")
    _add_protocol_flags(p_sim)
    p_sim.add_argument(
        "--sequence", type=Path, help="gate-sequence JSON file (custom protocol)"
    )
    p_sim.add_argument("--out", type=Path)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter around the base point")
    _add_protocol_flags(p_sweep)
    p_sweep.add_argument("--vary", required=True, help="name of the parameter to perturb")
    p_sweep.add_argument(
        "--range",
        required=True,
        metavar="MIN:MAX:STEPS",
        help="perturbation grid around the base value",
    )
    _add_output_flags(p_sweep, "csv")

    p_cmp = sub.add_parser("compare", help="robustness comparison of the two methods")
    for flag in ("--alpha", "--beta", "--theta", "--phi"):
        p_cmp.add_argument(flag, type=float, required=True)
    _add_output_flags(p_cmp, "csv")

    p_ver = sub.add_parser("verify", help="randomized branch-vs-Fock verification")
    p_ver.add_argument("--trials", type=int, default=100)
    p_ver.add_argument("--seed", type=int, default=42)
    p_ver.add_argument(
        "--force-cutoff",
        type=int,
        dest="force_cutoff",
        help="override the automatic Fock cutoff (debug)",
    )
    p_ver.add_argument("--out", type=Path)

    return parser


def _gather_params(args, protocol: Provenance) -> dict:
    required = _REQUIRED_PARAMS[protocol]
    missing = [name for name in required if getattr(args, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise _InputError(f"protocol {args.protocol!r} needs {flags}")
    params = {name: getattr(args, name) for name in required}
    if protocol is Provenance.GEOMETRIC_GENERAL:
        params["omega"] = complex(params.pop("omega_re"), params.pop("omega_im"))
    return params


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n")


def _cmd_simulate(args) -> int:
    protocol = _PROTOCOL_NAMES[args.protocol]
    if protocol is Provenance.CUSTOM:
        if args.sequence is None:
            raise _InputError("custom protocol needs --sequence FILE")
        try:
            sequence = GateSequence.from_json(args.sequence.read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise _InputError(f"cannot load sequence file: {exc}") from exc
        initial_bus = complex(args.alpha if args.alpha is not None else 0.0)
    else:
        sequence, initial_bus = build_protocol(protocol, _gather_params(args, protocol))
    metrics, final = run_simulation(sequence, initial_bus)
    payload = {"metrics": metrics.to_dict(), "final_state": final.to_dict()}
    _emit(json.dumps(payload, indent=2), args.out)
    return 0


def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _InputError("--range must look like MIN:MAX:STEPS")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise _InputError(f"bad --range value: {exc}") from exc


def _cmd_sweep(args) -> int:
    protocol = _PROTOCOL_NAMES[args.protocol]
    if protocol is Provenance.CUSTOM:
        raise _InputError("sweep needs a builder protocol, not custom")
    try:
        config = SweepConfig(
            protocol=protocol,
            base_params=_gather_params(args, protocol),
            vary=args.vary,
            range=_parse_range(args.range),
            metric=Metric.CONCURRENCE_SQUARED,
        )
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    result = run_sweep(config)
    _emit(result.to_csv() if args.format == "csv" else result.to_json(indent=2), args.out)
    return 0


def _cmd_compare(args) -> int:
    try:
        report = compare_methods(args.alpha, args.beta, args.theta, args.phi)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    _emit(report.to_csv() if args.format == "csv" else report.to_json(indent=2), args.out)
    return 0


def _cmd_verify(args) -> int:
    if args.trials < 1:
        raise _InputError("--trials must be at least 1")
    report = verify_oracle(args.trials, args.seed, force_cutoff=args.force_cutoff)
    _emit(report.to_json(indent=2), args.out)
    return 0 if report.passed else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _InputError as exc:
        sys.stderr.write(json.dumps({"error": "input", "message": str(exc)}) + "\n")
        return 1
    except QubusError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
