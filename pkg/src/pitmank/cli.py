"""Command-line interface.

Subcommands: pmf | moments | diversity | approx | sample | study | verify.
Rationals are accepted as "p/q" strings.  Exit codes: 0 success, 1 input
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from fractions import Fraction

from . import asymptotics as asym
from . import distribution as dist
from . import harness
from .numerics import DomainError, PitmanParams, PrecisionError
from .sampler import SeedSpec, mc_moments, sample_k_batch

__all__ = ["cli_main", "main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _rational(text: str):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _number(text: str):
    # prefer exact rationals; fall back to float for things like 1e-3
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _r_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return format(float(value), ".17g")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pitmank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p, theta_required=True):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha", type=_number, required=True)
        p.add_argument("--theta", type=_number, required=theta_required)
        p.add_argument("--precision-bits", type=int, default=None)

    p = sub.add_parser("pmf", help="pmf of the number of blocks")
    add_params(p)
    p.add_argument("--exact", action="store_true", help="force exact rational mode")
    p.add_argument("--float", dest="float_mode", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("moments", help="exact moments E[K^r]")
    add_params(p)
    p.add_argument("--r", type=_r_list, required=True, help="order or comma list")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--float", dest="float_mode", action="store_true")
    p.add_argument("--format", choices=("plain", "csv", "json"), default="plain")

    p = sub.add_parser("diversity", help="limit moments and densities")
    p.add_argument("--alpha", type=_number, required=True)
    p.add_argument("--theta", type=_number, default=Fraction(0))
    p.add_argument("--r", type=_r_list, default=())
    p.add_argument("--x", type=float, default=None, help="evaluate the density at x")
    p.add_argument(
        "--density-batch",
        default=None,
        help="one-column CSV of x values to evaluate the density at",
    )
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-terms", type=int, default=10_000)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("approx", help="exact normalized moment vs approximations")
    add_params(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument(
        "--scaling",
        choices=sorted(asym.SCALES),
        default="n_alpha",
    )
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("sample", help="draw block counts")
    add_params(p)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("study", help="run a named study")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--name", choices=harness.STUDIES, default=None)
    p.add_argument("--alpha", type=_number, default=Fraction(1, 2))
    p.add_argument("--theta", type=_number, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--r-values", type=_r_list, default=(1, 2))
    p.add_argument("--grid", default="2^8..2^16")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=256)
    p.add_argument("--tail", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--output", default=None, help="prefix for .csv and .json")

    p = sub.add_parser("verify", help="exact-identity verification suite")
    p.add_argument("--output", default=None)
    p.add_argument("--precision-bits", type=int, default=None)
    return parser


def _resolve_mode(args) -> str:
    if getattr(args, "exact", False) and getattr(args, "float_mode", False):
        raise DomainError("--exact and --float are mutually exclusive")
    if getattr(args, "exact", False):
        return "exact"
    if getattr(args, "float_mode", False):
        return "float"
    return "auto"


def _cmd_pmf(args) -> int:
    params = PitmanParams(args.n, args.alpha, args.theta)
    mode = _resolve_mode(args)
    if args.format == "json":
        payload = dist.moments_json_payload(
            params, include_pmf=True, bits=args.precision_bits, mode=mode
        )
        print(json.dumps(payload, sort_keys=True))
    else:
        pmf = dist.length_pmf(params, bits=args.precision_bits, mode=mode)
        print("k,p")
        for k, prob in enumerate(pmf, start=1):
            print(f"{k},{_fmt(prob)}")
    return 0


def _cmd_moments(args) -> int:
    params = PitmanParams(args.n, args.alpha, args.theta)
    mode = _resolve_mode(args)
    values = {
        r: dist.exact_moment(params, r, bits=args.precision_bits, mode=mode)
        for r in args.r
    }
    if args.format == "json":
        payload = dist.moments_json_payload(
            params, r_values=tuple(args.r), bits=args.precision_bits, mode=mode
        )
        print(json.dumps(payload, sort_keys=True))
    elif args.format == "csv":
        print("r,moment")
        for r, v in values.items():
            print(f"{r},{_fmt(v if isinstance(v, Fraction) else v.value)}")
    else:
        for v in values.values():
            print(_fmt(v if isinstance(v, Fraction) else v.value))
    return 0


def _cmd_diversity(args) -> int:
    out_rows = []
    if args.x is not None or args.density_batch:
        xs = []
        if args.x is not None:
            xs.append(args.x)
        if args.density_batch:
            with open(args.density_batch) as fh:
                for line in fh:
                    line = line.strip()
                    if line and not line.startswith("#"):
                        xs.append(float(line))
        for x in xs:
            val = asym.diversity_density(
                args.alpha, args.theta, x, tol=args.tol, bits=args.precision_bits
            )
            out_rows.append(("x", x, float(val)))
    for r in args.r:
        val = asym.diversity_moment(
            args.alpha, args.theta, r, bits=args.precision_bits, mode="auto"
        )
        if isinstance(val, Fraction):
            out_rows.append(("r", r, val))
        else:
            out_rows.append(("r", r, float(val)))
    if args.format == "json":
        payload = {
            "alpha": _fmt(args.alpha),
            "theta": _fmt(args.theta),
            "values": [
                {"kind": kind, "at": at, "value": _fmt(v)} for kind, at, v in out_rows
            ],
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        print("kind,at,value")
        for kind, at, v in out_rows:
            print(f"{kind},{at},{_fmt(v)}")
    return 0


def _cmd_approx(args) -> int:
    params = PitmanParams(args.n, args.alpha, args.theta)
    report = harness.build_moment_report(
        params, args.r, scaling=args.scaling, bits=args.precision_bits
    )
    if args.format == "json":
        print(json.dumps(asdict(report), sort_keys=True))
    else:
        print("label,approx,residual")
        print(f"exact,{_fmt(report.normalized)},0")
        for label in sorted(report.approximations):
            print(
                f"{label},{_fmt(report.approximations[label])},"
                f"{_fmt(report.residuals[label])}"
            )
    return 0


def _cmd_sample(args) -> int:
    params = PitmanParams(args.n, args.alpha, args.theta)
    if args.format == "json":
        stats = mc_moments(
            params, args.r, args.replicates, SeedSpec(args.seed), streams=args.streams
        )
        print(json.dumps(asdict(stats), sort_keys=True))
    else:
        if args.streams < 1 or args.streams > args.replicates:
            raise DomainError("streams must lie in 1..replicates")
        per = [args.replicates // args.streams] * args.streams
        for j in range(args.replicates % args.streams):
            per[j] += 1
        print("replicate,k")
        idx = 0
        for stream, count in enumerate(per):
            if not count:
                continue
            ks = sample_k_batch(params, count, SeedSpec(args.seed, stream))
            for k in ks:
                print(f"{idx},{int(k)}")
                idx += 1
    return 0


def _config_from_args(args) -> harness.StudyConfig:
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if args.output:
            data["output"] = args.output
        return harness.config_from_dict(data)
    if not args.name:
        raise DomainError("study needs --name or --config")
    data = {
        "study": args.name,
        "alpha": str(args.alpha),
        "grid": args.grid,
        "r_values": list(args.r_values),
        "seed": args.seed,
        "replicates": args.replicates,
        "tail": args.tail,
        "tol": args.tol,
    }
    if args.precision_bits is not None:
        data["precision_bits"] = args.precision_bits
    if args.beta is not None:
        data["beta"] = args.beta
    if args.theta is not None:
        data["theta"] = str(args.theta)
    if args.output:
        data["output"] = args.output
    return harness.config_from_dict(data)


def _print_study_result(result: harness.StudyResult) -> None:
    for key, info in sorted(result.fitted_slopes.items()):
        print(
            f"slope {key}: {info['slope']:+.4f} (stderr {info['stderr']:.4f}, "
            f"expected {info['expected']:+.2f} +/- {info['tolerance']:.2f}) "
            f"{'PASS' if info['pass'] else 'FAIL'}"
        )
    for key, ok in sorted(result.pass_flags.items()):
        print(f"check {key}: {'PASS' if ok else 'FAIL'}")
    print(f"study {result.study}: {'PASS' if result.passed else 'FAIL'}")


def _cmd_study(args) -> int:
    config = _config_from_args(args)
    result = harness.run_study(config)
    _print_study_result(result)
    return 0 if result.passed else 1


def _cmd_verify(args) -> int:
    data = {"study": "verify", "grid": [1], "r_values": [1, 2, 3, 4]}
    if args.output:
        data["output"] = args.output
    if args.precision_bits is not None:
        data["precision_bits"] = args.precision_bits
    config = harness.config_from_dict(data)
    result = harness.run_study(config)
    _print_study_result(result)
    return 0 if result.passed else 1


_COMMANDS = {
    "pmf": _cmd_pmf,
    "moments": _cmd_moments,
    "diversity": _cmd_diversity,
    "approx": _cmd_approx,
    "sample": _cmd_sample,
    "study": _cmd_study,
    "verify": _cmd_verify,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except PrecisionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main())
