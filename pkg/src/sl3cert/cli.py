"""Command line driver: ``sl3cert ball|solve|verify|report``.

Exit codes: 0 success or pass, 1 verification failed, 2 input error,
3 solver did not converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .certify import (
    DEFAULT_DENOMINATOR,
    DEFAULT_THRESHOLD,
    Certificate,
    CertificateError,
    NotPSDError,
    VerificationReport,
    round_and_fix,
    sqrt_factor,
    verify,
)
from .gram import UnsupportedTargetError, assemble, build_product_table
from .group_ring import target
from .matrix_group import ball, standard_generators
from .sdp import DEFAULT_EPS, SolverConfig, SolveReport, max_eps_bisection, solve_feasibility

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

log = logging.getLogger("sl3cert")


@dataclass
class PipelineConfig:
    radius: int = 2
    eps: Fraction = DEFAULT_EPS
    denominator: int = DEFAULT_DENOMINATOR
    tolerance: float = 1e-9
    max_iterations: int = 200_000
    method: str = "ipm"
    threshold: Fraction = DEFAULT_THRESHOLD
    out: Path | None = Path("certificate.txt")
    log_path: Path | None = None
    bisect: bool = False
    window: tuple = (Fraction(0), DEFAULT_EPS)
    resolution: Fraction = Fraction(1, 10_000)


def parse_rational(text: str) -> Fraction:
    """Exact rational from ``num/den`` or a decimal string."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _decimal(x: Fraction, digits: int = 4) -> str:
    return f"{float(x):.{digits}g}"


def cmd_ball(radius: int, listing: bool = False, out=None) -> int:
    out = sys.stdout if out is None else out
    basis = ball(standard_generators(), radius)
    print(f"{basis.m} elements", file=out)
    if listing:
        for g, length in zip(basis.elements, basis.lengths):
            print(length, " ".join(str(x) for x in g.entries), file=out)
    return EXIT_OK


def solve_to_certificate(config: PipelineConfig, out=None) -> tuple[SolveReport | None, Certificate | None, Fraction]:
    out = sys.stdout if out is None else out
    gens = standard_generators()
    basis = ball(gens, config.radius)
    table = build_product_table(basis)
    log_stream = open(config.log_path, "w") if config.log_path else None
    try:
        solver = SolverConfig(
            tolerance=config.tolerance,
            max_iterations=config.max_iterations,
            method=config.method,
            mode="bisection" if config.bisect else "fixed-eps",
            window=config.window,
            resolution=config.resolution,
            log_stream=log_stream,
        )
        eps = config.eps
        if config.bisect:
            eps, report = max_eps_bisection(gens, basis, solver, table)
            print(f"bisection: largest feasible eps {eps} ({_decimal(eps, 6)})", file=out)
            if report is None:
                return None, None, eps
        else:
            report = solve_feasibility(assemble(table, target(eps, gens)), solver)
    finally:
        if log_stream:
            log_stream.close()

    print(f"method={report.method} iterations={report.iterations} "
          f"affine_residual={report.affine_residual:.3e} psd_residual={report.psd_residual:.3e} "
          f"converged={'true' if report.converged else 'false'}", file=out)
    if report.margin is not None:
        print(f"eigenvalue margin={report.margin:.6e}", file=out)

    try:
        root = sqrt_factor(report.P)
    except NotPSDError as exc:
        if report.P_psd is None:
            raise
        log.info("%s; rounding the PSD-side iterate instead", exc)
        print("Gram matrix not PSD enough; rounding the PSD-side iterate", file=out)
        root = sqrt_factor(report.P_psd)
    Q = round_and_fix(root, config.denominator)
    cert = Certificate(Q=Q, D=config.denominator, eps=Fraction(eps), radius=config.radius,
                       generators=tuple(gens.members))
    return report, cert, eps


def cmd_solve(config: PipelineConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    start = time.perf_counter()
    try:
        report, cert, eps = solve_to_certificate(config, out)
    except UnsupportedTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotPSDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if cert is None:
        print("no feasible eps found in the window", file=out)
        return EXIT_NOT_CONVERGED
    if config.out is not None:
        cert.save(config.out)
        print(f"wrote {config.out} (m={cert.m} D={cert.D} eps={eps})", file=out)
    print(f"elapsed {time.perf_counter() - start:.1f}s", file=out)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _load_and_verify(path, threshold) -> VerificationReport:
    cert = Certificate.load(path)
    return verify(cert, threshold=threshold)


def cmd_verify(path, threshold=DEFAULT_THRESHOLD, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        rep = _load_and_verify(path, threshold)
    except (OSError, CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(rep.serialize())
    return EXIT_OK if rep.passed else EXIT_FAIL


def format_report(rep: VerificationReport) -> str:
    def q(x):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    lines = [
        f"eps                 {q(rep.eps)} ≈ {_decimal(rep.eps)}",
        f"||c||_1             {q(rep.l1_residual)} ≈ {_decimal(rep.l1_residual)}",
        f"lemma constant      {q(rep.lemma_constant)} (d={rep.d})",
        f"certified eps       {q(rep.eps_certified)} ≈ {_decimal(rep.eps_certified)}",
        f"normalized gap      {q(rep.normalized_gap)} ≈ {_decimal(rep.normalized_gap)}",
        f"threshold           {q(rep.threshold)} ≈ {_decimal(rep.threshold)}",
        f"result              {'PASS' if rep.passed else 'FAIL'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_report(path, threshold=DEFAULT_THRESHOLD, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        rep = _load_and_verify(path, threshold)
    except (OSError, CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(format_report(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sl3cert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ball", help="enumerate a word-length ball")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--list", action="store_true", help="print every element")

    p = sub.add_parser("solve", help="solve the SDP and write a certificate")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--eps", type=parse_rational, default=DEFAULT_EPS)
    p.add_argument("--denominator", type=int, default=DEFAULT_DENOMINATOR)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--method", choices=("ipm", "dykstra"), default="ipm")
    p.add_argument("--out", type=Path, default=Path("certificate.txt"))
    p.add_argument("--log", type=Path, default=None, help="CSV iteration log")
    p.add_argument("--bisect", action="store_true", help="search the largest feasible eps")
    p.add_argument("--window", type=parse_rational, nargs=2, default=(Fraction(0), DEFAULT_EPS))
    p.add_argument("--resolution", type=parse_rational, default=Fraction(1, 10_000))

    for name, text in (("verify", "check a certificate exactly"), ("report", "summarize a certificate")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--in", dest="path", type=Path, default=Path("certificate.txt"))
        p.add_argument("--threshold", type=parse_rational, default=DEFAULT_THRESHOLD)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "ball":
        if args.radius < 0:
            print("error: radius must be nonnegative", file=sys.stderr)
            return EXIT_INPUT
        return cmd_ball(args.radius, args.list)
    if args.command == "solve":
        if args.radius < 0 or args.denominator < 1 or args.max_iter < 1 or not args.tol > 0:
            print("error: invalid solver parameters", file=sys.stderr)
            return EXIT_INPUT
        config = PipelineConfig(
            radius=args.radius, eps=args.eps, denominator=args.denominator,
            tolerance=args.tol, max_iterations=args.max_iter, method=args.method,
            out=args.out, log_path=args.log, bisect=args.bisect,
            window=tuple(args.window), resolution=args.resolution,
        )
        return cmd_solve(config)
    if args.command == "verify":
        return cmd_verify(args.path, args.threshold)
    return cmd_report(args.path, args.threshold)


if __name__ == "__main__":
    sys.exit(main())
