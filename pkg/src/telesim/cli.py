"""``telesim`` command line.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

from . import kernel
from .harness import (
    ConfigError,
    RunConfig,
    dumps,
    resolve_output,
    run_experiment,
    run_verification_suite,
    summary_lines,
    write_json,
)


def parse_complex(text: str) -> complex:
    """Parse one component written as ``re+imI`` (``I`` or ``j`` as the imaginary unit)."""
    t = text.strip().replace(" ", "")
    if t.endswith(("I", "i")):
        t = t[:-1] + "j"
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    return complex(t)


def parse_input(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("expected two comma-separated amplitudes a,b")
    return parse_complex(parts[0]), parse_complex(parts[1])


def _common(p: argparse.ArgumentParser, alpha2_default: float = 0.5) -> None:
    p.add_argument("--alpha2", type=float, default=alpha2_default, help="channel alpha^2 (Schmidt weight)")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--format", dest="output_format", default="json", choices=("json", "csv"))
    p.add_argument("--out", dest="output_path", default=None)


def _teleport_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", dest="fixed_input", default=None, help="fixed input amplitudes, e.g. 0.6,0.8I")
    p.add_argument("--enumerate", action="store_true", help="exact branch enumeration instead of sampling")
    p.add_argument("--one-bit", action="store_true", help="announce success only on the singlet-like outcome")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=("cython", "python"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telesim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--out", dest="output_path", default=None)
    v.add_argument("--inject-fault", action="store_true", help="perturb one POVM element to exercise failure reporting")
    v.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples per USD setting")

    t = sub.add_parser("teleport", help="Bell-measurement teleportation")
    _common(t)
    _teleport_flags(t)

    c = sub.add_parser("conclusive", help="conclusive teleportation over a partially entangled channel")
    _common(c, alpha2_default=0.8)
    _teleport_flags(c)

    tp = sub.add_parser("telepovm", help="Bell measurement with ancilla versus the four-element POVM")
    tp.add_argument("--theta", type=float, default=None, help="single angle; default sweeps 100 angles")
    tp.add_argument("--seed", type=int, default=1)
    tp.add_argument("--out", dest="output_path", default=None)

    e = sub.add_parser("ensemble-demo", help="remote ensemble preparation demos")
    e.add_argument("--alpha2", type=float, default=0.8)
    e.add_argument("--theta", type=float, default=None)
    e.add_argument("--seed", type=int, default=1)
    e.add_argument("--out", dest="output_path", default=None)
    return parser


def config_from_args(args) -> RunConfig:
    if args.command == "telepovm":
        return RunConfig("verify-telepovm", theta=args.theta, seed=args.seed, output_path=args.output_path)
    if args.command == "ensemble-demo":
        return RunConfig("ensemble-demo", alpha2=args.alpha2, theta=args.theta, seed=args.seed, output_path=args.output_path)
    if args.command == "teleport":
        protocol = "singlet-only" if args.one_bit else "standard"
    else:
        protocol = "conclusive-singlet-only" if args.one_bit else "conclusive"
    fixed = None
    if args.fixed_input is not None:
        try:
            fixed = parse_input(args.fixed_input)
        except ValueError as exc:
            raise ConfigError("input", str(exc)) from None
        norm = math.sqrt(abs(fixed[0]) ** 2 + abs(fixed[1]) ** 2)
        if abs(norm * norm - 1.0) > 1e-9:
            raise ConfigError("input", f"|a|^2 + |b|^2 = {norm * norm!r}, expected 1")
        fixed = (fixed[0] / norm, fixed[1] / norm)
    mode = "enumerate-branches" if args.enumerate else ("fixed" if fixed is not None else "random")
    return RunConfig(
        protocol,
        alpha2=args.alpha2,
        trials=args.trials,
        seed=args.seed,
        input_mode=mode,
        fixed_input=fixed,
        output_format=args.output_format,
        output_path=args.output_path,
        workers=args.workers,
        backend=args.backend,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "verify":
            report, code = run_verification_suite(seed=args.seed, inject_fault=args.inject_fault, mc_samples=args.samples)
            cfg = RunConfig("verify-telepovm", seed=args.seed, output_path=args.output_path)
            path = resolve_output(cfg) if args.output_path else None
            if path is not None:
                write_json(report, path)
        else:
            report, code = run_experiment(config_from_args(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for line in summary_lines(report):
        print(line)
    print(f"backend: {kernel.BACKEND}  elapsed: {time.perf_counter() - start:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
