"""Command-line front end: ``capbound bound|sweep|certify|selftest``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import (
    CapacityVerdict,
    classical_bound_hull,
    classical_bound_simple,
    max_capacity_certificate_classical,
    max_quantum_capacity_certificate,
)
from .channels import ChannelFormatError, dilate, parse_channel_spec
from .operators import DimensionError, ValidationError
from .optimize import OptimizerConfig
from .selftest import run_selftest
from .sweep import p_grid, rows_to_csv, rows_to_json, resolve_measurement, run_sweep

EXIT_IO = 1
EXIT_INVALID = 2
CERTIFY_EXIT = {
    CapacityVerdict.MAXIMUM_CAPACITY_POSSIBLE: 0,
    CapacityVerdict.GAP_CERTIFIED: 3,
    CapacityVerdict.INDETERMINATE: 4,
}


def _grid(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 60x120x120, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 2:
        raise argparse.ArgumentTypeError(f"grid must be three sizes >= 2, got {text!r}")
    return parts


def _add_config(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--grid", type=_grid, default=(60, 120, 120), help="Bloch grid, e.g. 60x120x120")
    p.add_argument("--workers", type=int, default=1)


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=args.seed, restarts=args.restarts, grid=args.grid)


def _matrix_text(a: np.ndarray) -> str:
    return np.array2string(a, precision=6, suppress_small=True, max_line_width=100)


def cmd_bound(args) -> int:
    T = parse_channel_spec(args.channel)
    m = resolve_measurement(args.meas, dilate(T).d_env)
    bound = classical_bound_hull if args.form == "hull" else classical_bound_simple
    report = bound(T, m, _config(args))
    if args.json:
        print(json.dumps(report.as_dict(), indent=1))
        return 0
    d = report.diagnostics
    print(f"channel           {T.name}")
    print(f"measurement       {m.name}")
    print(f"form              {args.form}")
    print(f"value             {report.value:.9f}")
    print(f"kind              {report.kind.value}")
    print(f"certified         {'yes' if report.certified else 'no'}")
    print(f"s_max_term        {report.s_max_term:.9f}")
    print(f"correlation_term  {report.correlation_term:.9f}")
    print(f"resolution        {d.get('resolution', '')}")
    if "tilt" in d:
        print(f"tilt              {np.array2string(np.asarray(d['tilt']), precision=6)}")
    return 0


def cmd_sweep(args) -> int:
    try:
        ps = p_grid(args.p_from, args.p_to, args.steps)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    cfg = _config(args)
    rows = run_sweep(args.channel, ps, args.meas, cfg, args.form, args.workers)
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        config = {
            "channel": args.channel,
            "meas": args.meas,
            "form": args.form,
            "p_from": args.p_from,
            "p_to": args.p_to,
            "steps": args.steps,
            "seed": cfg.seed,
            "restarts": cfg.restarts,
            "grid": list(cfg.grid),
        }
        text = rows_to_json(rows, config)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def cmd_certify(args) -> int:
    T = parse_channel_spec(args.channel)
    cfg = _config(args)
    if args.which == "classical":
        cert = max_capacity_certificate_classical(T, cfg)
    else:
        cert = max_quantum_capacity_certificate(T, cfg)
    print(f"channel        {T.name}")
    print(f"capacity       {args.which}")
    print(f"verdict        {cert.verdict.value}")
    print(f"s_max          {cert.s_max:.9f}")
    print(f"separability   {cert.separability.verdict.value}")
    print(f"ppt_witness    {cert.separability.witness:.6e}")
    if "min_defect" in cert.details:
        print(f"min_defect     {cert.details['min_defect']:.6e}")
    print("optimal_state")
    print(_matrix_text(cert.optimal_state))
    return CERTIFY_EXIT[cert.verdict]


def cmd_selftest(args) -> int:
    summary = run_selftest(args.trials, args.seed, args.tolerance, OptimizerConfig(seed=args.seed, restarts=args.restarts))
    print(summary.text())
    return 0 if summary.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capbound", description="Capacity bounds for quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="classical-capacity upper bound for a fixed environment measurement")
    p.add_argument("--channel", required=True, help="zoo name such as amplitude-damping:0.25, or a channel file")
    p.add_argument("--meas", required=True, help="fig2-x3, fig2-x4, trivial, computational, or a measurement file")
    p.add_argument("--form", choices=("hull", "simple"), default="hull")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_config(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="tabulate capacity figures over a channel family")
    p.add_argument("--channel", default="amplitude-damping", help="zoo family taking one parameter")
    p.add_argument("--meas", default="fig2-x3")
    p.add_argument("--p-from", type=float, default=0.0)
    p.add_argument("--p-to", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--out", default=None, help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--form", choices=("hull", "simple"), default="hull")
    _add_config(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="decide whether single-shot capacity can reach S_max")
    p.add_argument("--channel", required=True)
    p.add_argument("--which", choices=("classical", "quantum"), default="classical")
    _add_config(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("selftest", help="duality battery and invariant checks")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=None, help="override every check tolerance")
    _add_config(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ChannelFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
