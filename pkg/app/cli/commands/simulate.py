import argparse

from app.cli import deps
from app.cli.logger import get_logger
from app.core.exceptions import EXIT_FAILED_TRIAL
from app.schemas.responses import SimulateSummary
from app.utils.experiments import run_trials
from app.utils.reports import write_report

# Set up logger for this module
logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:  # type: ignore[type-arg]
    parser = subparsers.add_parser("simulate", help="sample, differentiate and solve; write roots CSV and summary")
    deps.add_ensemble_options(parser)
    deps.add_plan_options(parser)
    deps.add_trial_options(parser)
    parser.add_argument("--target", help="optional comparison target for KS statistics")
    parser.set_defaults(handler=run)


def execute(args: argparse.Namespace, command: str, target: str | None) -> int:
    """Run every configured degree and persist one CSV/JSON pair per degree."""
    exit_code = 0
    out = deps.output_dir(args)
    for cfg in deps.experiment_configs(args, target):
        report = run_trials(cfg)
        stem = deps.file_stem(command, cfg)
        csv_path, json_path = out / f"{stem}_roots.csv", out / f"{stem}_summary.json"
        if report.successful:
            write_report(report, csv_path, json_path)
        else:
            logger.error(f"All {cfg.trials} trials failed for n={cfg.n}, nothing written")
        if report.failed_trials:
            exit_code = EXIT_FAILED_TRIAL
        summary = SimulateSummary(
            n=cfg.n,
            N_n=report.plan_N_n,
            D_n=report.plan_D_n,
            pooled_ks=report.pooled_ks,
            angular_discrepancy=report.angular_discrepancy,
            annulus_fractions=report.annulus_fractions,
            failed_trials=report.failed_trials,
            summary=str(json_path) if report.successful else None,
        )
        print(summary.model_dump_json())
    return exit_code


def run(args: argparse.Namespace) -> int:
    logger.info(f"simulate request for ensemble={args.ensemble} n={args.n}")
    return execute(args, "simulate", args.target)
