import argparse
from pathlib import Path

from app.cli import cli_messages, deps
from app.cli.logger import get_logger
from app.core.exceptions import InvalidParameterError, ReportError
from app.schemas.responses import FixedDegreeReport
from app.utils.ensembles import sample_xi
from app.utils.experiments import fixed_degree_convergence, limit_roots_of
from app.utils.limits import FixedDegreeKind

# Set up logger for this module
logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:  # type: ignore[type-arg]
    parser = subparsers.add_parser("fixed-degree", help="distance of rescaled derivative zeros to the fixed-degree limit")
    parser.add_argument("--ensemble", default="kac", help="kac | elliptic")
    parser.add_argument("--fixed-m", dest="fixed_m", type=int, required=True, help="degree m of the derivative")
    parser.add_argument("--n", required=True, help="comma separated list of degrees, each larger than m")
    parser.add_argument("--dist", default="complex-gaussian")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, help="also write the JSON report to this file")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    try:
        kind = FixedDegreeKind(args.ensemble)
    except ValueError as e:
        raise InvalidParameterError(cli_messages.FIXED_DEGREE_KIND) from e
    degrees = deps.parse_degrees(args.n)
    sampler = deps.parse_sampler(args.dist)
    logger.info(f"fixed-degree request for {kind} m={args.fixed_m} n={degrees} seed={args.seed}")

    xi = sample_xi(sampler, args.fixed_m + 1, args.seed, 0)
    distances = fixed_degree_convergence(kind, args.fixed_m, degrees, args.seed, xi=xi)
    limit_roots = limit_roots_of(kind, args.fixed_m, xi)

    report = FixedDegreeReport(
        ensemble=kind.value,
        m=args.fixed_m,
        seed=args.seed,
        n=degrees,
        max_pairing_distance=distances,
        limit_roots=[(float(z.real), float(z.imag)) for z in limit_roots],
    )
    text = report.model_dump_json(indent=2)
    print(text)
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text + "\n")
        except OSError as e:
            raise ReportError(f"Cannot write fixed-degree report: {e.strerror}", path=str(args.out)) from e
        logger.info(f"Wrote fixed-degree report to {args.out}")
    return 0
