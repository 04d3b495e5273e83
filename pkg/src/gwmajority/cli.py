"""Command-line front end.

Exit codes: 0 success, 2 iteration did not converge, 64 usage error,
65 invalid data or a failed check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import DomainError, IdentityViolation, TruncationError
from .offspring import parse_distribution
from .simplex import ProbabilityVector, iterate, write_trajectory_csv

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 2
EXIT_USAGE = 64
EXIT_DATA = 65

SEED_ENV = "GWMAJORITY_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")

    def convert_arg_line_to_args(self, line):
        line = line.split("#", 1)[0]
        return line.split()


def parse_range(text: str) -> list[int]:
    """Comma-separated items, each an integer or an inclusive ``a..b``."""
    out = []
    try:
        for item in text.split(","):
            if ".." in item:
                lo, hi = (int(v) for v in item.split(".."))
                if lo > hi:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(item))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    return out


def parse_vector(text: str) -> list[float]:
    """Comma-separated probabilities; fractions such as ``1/3`` are accepted.

    Values are converted to floats: exact iteration grows denominators
    geometrically, so long orbits are only practical in floating point.
    """
    try:
        return [float(Fraction(v.strip())) for v in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad probability vector {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _dist(text: str):
    try:
        return parse_distribution(text)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@contextmanager
def _output(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path) -> None:
    with _output(path) as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_iterate(args) -> int:
    p = ProbabilityVector(args.p)
    traj = iterate(p, args.dist, max_steps=args.max_steps, tol=args.tol)
    with _output(args.output) as fh:
        write_trajectory_csv(traj, fh, args.digits)
    if not traj.converged:
        print(f"no convergence after {args.max_steps} steps", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_table(args) -> int:
    from .fixed_points import table_rows, write_table_csv

    ns = [n for n in args.even if n % 2 == 0]
    if not ns:
        raise UsageError("--even selects no even n")
    with _output(args.output) as fh:
        write_table_csv(table_rows(ns), fh, args.digits)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .montecarlo import SimConfig, compare_exact, estimate

    config = SimConfig(args.dist, args.height, ProbabilityVector(args.p), args.samples, args.seed, args.batches)
    result = estimate(config, workers=args.workers)
    out = json.loads(result.to_json())
    if args.compare:
        out["comparison"] = compare_exact(result)
    _emit_json(out, args.output)
    return EXIT_OK


def cmd_certify(args) -> int:
    from .budan import gamma_certificate
    from .fixed_points import BasinCertificate, fixed_point_report

    reports = []
    if args.dist is not None:
        rep = fixed_point_report(args.dist)
        reports.append(
            {
                "source": rep.source,
                "fixed_point": rep.as_dict(),
                "verdict": rep.basin_certificate is not BasinCertificate.NONE,
            }
        )
    for n in args.n or []:
        rep = fixed_point_report(n)
        cert = gamma_certificate(n)
        reports.append(
            {
                "source": rep.source,
                "budan": cert.as_dict(),
                "fixed_point": rep.as_dict(),
                "verdict": cert.verdict and rep.basin_certificate is not BasinCertificate.NONE,
            }
        )
    if not reports:
        raise UsageError("certify needs --n or --dist")
    _emit_json(reports, args.output)
    return EXIT_OK if all(r["verdict"] for r in reports) else EXIT_DATA


def _report(results) -> int:
    from .bounds import FAIL

    return EXIT_DATA if any(r["verdict"] == FAIL for r in results) else EXIT_OK


def cmd_bounds(args) -> int:
    from .bounds import check_alpha_envelope, check_dpa_threshold, check_xi_bounds

    results = []
    for n in args.n or []:
        results += [r.as_dict() for r in check_xi_bounds(n, strict=False)]
    for n in args.estim or []:
        results += [r.as_dict() for r in check_alpha_envelope(n, strict=False)]
    for n in args.dpa or []:
        if n % 2 == 0:
            results += [r.as_dict() for r in check_dpa_threshold(n)]
    if not (args.n or args.estim or args.dpa):
        raise UsageError("bounds needs --n, --estim or --dpa")
    _emit_json(results, args.output)
    return _report(results)


def cmd_identities(args) -> int:
    from .bounds import identity_suite
    from .uniform import check_recurrences

    results = [r.as_dict() for r in identity_suite(args.n_max, args.ell_max, args.seed)]
    rng = np.random.default_rng(args.seed)
    for n in range(2, args.recurrence_max + 1):
        ts = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(0, 100, 5), rng.integers(100, 200, 5))]
        rep = check_recurrences(n, [Fraction(1, 2), Fraction(1), *ts])
        results.append(
            {
                "name": "recurrences",
                "n": n,
                "points": [str(t) for t in rep.points],
                "argmin_residual": rep.argmin_residual,
                "verdict": "pass",
            }
        )
    _emit_json(results, args.output)
    return _report(results)


def cmd_plotdata(args) -> int:
    from .uniform import eval_f3, eval_fn, geometric_f_closed, write_curves_csv

    ts = np.linspace(0.0, 1.0, args.grid)
    curves = {}
    for n in args.fn or []:
        curves[f"f_{n}"] = eval_fn(n, ts)
    for p in args.geom or []:
        curves[f"geom_{p!r}"] = geometric_f_closed(p, ts)
    for n in args.f3 or []:
        curves[f"f3_{n}"] = [eval_f3(n, float(t)) for t in ts]
    if not curves:
        raise UsageError("plotdata needs --fn, --geom or --f3")
    with _output(args.output) as fh:
        write_curves_csv(ts, curves, fh, args.digits)
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gwmajority",
        description="Majority-rule opinion dynamics on Galton-Watson trees.",
        fromfile_prefix_chars="@",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, digits=True):
        p.add_argument("-o", "--output", help="output file (default stdout)")
        if digits:
            p.add_argument("--digits", type=int, default=17, help="significant digits in CSV output")

    p = sub.add_parser("iterate", help="iterate the simplex map, trajectory as CSV")
    p.add_argument("--dist", type=_dist, required=True, help="nary:N | geom:P | pmf:n=q,...")
    p.add_argument("--p", type=parse_vector, required=True, help="initial state p_0,...,p_k")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-steps", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("table", help="fixed-point table for even n, as CSV")
    p.add_argument("--even", type=parse_range, required=True, help="range such as 4..26")
    common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="Monte Carlo root law, as JSON")
    p.add_argument("--dist", type=_dist, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--p", type=parse_vector, required=True, help="leaf law p_0,...,p_k")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help=f"default from ${SEED_ENV}, else 0")
    p.add_argument("--batches", type=int, default=1, help="independent seeded batches")
    p.add_argument("--workers", type=int, default=None, help="threads running batches")
    p.add_argument("--compare", action="store_true", help="add the exact H^m law for comparison")
    common(p, digits=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="Budan and basin certificates, as JSON")
    p.add_argument("--n", type=parse_range)
    p.add_argument("--dist", type=_dist)
    common(p, digits=False)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bounds", help="central binomial, Wallis and envelope checks, as JSON")
    p.add_argument("--n", type=parse_range, help="xi and Wallis bounds")
    p.add_argument("--estim", type=parse_range, help="fixed-point envelope (n >= 3)")
    p.add_argument("--dpa", type=parse_range, help="threshold sequence (even n >= 4)")
    common(p, digits=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("identities", help="exact binomial identities and recurrences, as JSON")
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--ell-max", type=int, default=5)
    p.add_argument("--recurrence-max", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    common(p, digits=False)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("plotdata", help="curve samples for figures, as CSV")
    p.add_argument("--fn", type=parse_range, help="arities n for f_n")
    p.add_argument("--geom", type=parse_floats, help="geometric parameters p")
    p.add_argument("--f3", type=parse_range, help="arities n for the three-opinion curve")
    p.add_argument("--grid", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gwmajority: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, IdentityViolation, TruncationError, ValueError) as exc:
        print(f"gwmajority: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
