import argparse
from pathlib import Path

from app.cli import deps
from app.cli.logger import get_logger
from app.core.exceptions import ReportError
from app.schemas.responses import FitReport
from app.utils.ensembles import check_profile_fit, default_profile, ensemble_diagnostics, make_log_coeffs, parse_ensemble

# Set up logger for this module
logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:  # type: ignore[type-arg]
    parser = subparsers.add_parser("check-fit", help="profile fit deviation and eta_n / log b_n diagnostics")
    parser.add_argument("--ensemble", default="kac", help="kac | elliptic | counterexample | profile:<file>")
    parser.add_argument("--n", required=True, help="degree, or a comma separated list of degrees")
    deps.add_plan_options(parser)
    parser.add_argument("--delta", type=float, default=0.0, help="delta_n; (T0 - delta_n) * n must be an integer")
    parser.add_argument("--out", type=Path, help="also write the JSON report to this file")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    kind, profile = parse_ensemble(args.ensemble)
    profile = profile if profile is not None else default_profile(kind)
    rule = deps.parse_nn_rule(args)
    degrees = deps.parse_degrees(args.n)
    logger.info(f"check-fit request for ensemble={args.ensemble} against profile {profile.label}, n={degrees}")

    coeffs = [make_log_coeffs(kind, n, profile=profile) for n in degrees]
    sups = check_profile_fit(coeffs, profile, degrees, [args.delta] * len(degrees))
    plans = [rule.resolve(n) for n in degrees]
    diagnostics = [ensemble_diagnostics(c, plan.N_n, profile) for c, plan in zip(coeffs, plans, strict=True)]

    report = FitReport(
        ensemble=args.ensemble,
        profile=profile.label,
        n=degrees,
        N_n=[plan.N_n for plan in plans],
        sup_deviation=[float(s) for s in sups],
        eta=[d.eta for d in diagnostics],
        log_b=[d.log_b for d in diagnostics],
    )
    text = report.model_dump_json(indent=2)
    print(text)
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text + "\n")
        except OSError as e:
            raise ReportError(f"Cannot write fit report: {e.strerror}", path=str(args.out)) from e
        logger.info(f"Wrote fit report to {args.out}")
    return 0
