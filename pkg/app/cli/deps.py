import argparse
import re
from pathlib import Path

from app.cli import cli_messages
from app.cli.logger import get_logger
from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models import SamplerKind, SamplerSpec
from app.schemas.requests import ExperimentConfig, NnRule, RescaleMode, TargetSpec
from app.utils.calculus import PlanRule

# Set up logger for this module
logger = get_logger(__name__)


def add_ensemble_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ensemble", default="kac", help="kac | elliptic | counterexample | profile:<file>")
    parser.add_argument(
        "--dist",
        default=SamplerKind.COMPLEX_GAUSSIAN.value,
        help="xi law: " + " | ".join(kind.value for kind in SamplerKind) + " (heavy-tail-log:<alpha> allowed)",
    )
    parser.add_argument("--n", required=True, help="degree, or a comma separated list of degrees")
    parser.add_argument("--seed", type=int, default=0)


def add_plan_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--Nn", dest="Nn", help="differentiation order, or 'log' for n - floor(log n)")
    parser.add_argument("--ratio", type=float, help="N_n = floor(ratio * n)")
    parser.add_argument("--fixed-m", dest="fixed_m", type=int, help="keep D_n = m fixed")


def add_trial_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--rescale", choices=[mode.value for mode in RescaleMode], default=RescaleMode.NONE.value)
    parser.add_argument("--out", type=Path, help="output directory (default EXPERIMENTS__OUTPUT_DIR)")
    parser.add_argument(
        "--annulus",
        action="append",
        help="lo:hi annulus for the mass fraction, repeatable (default EXPERIMENTS__ANNULI)",
    )


def parse_degrees(text: str) -> list[int]:
    try:
        degrees = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InvalidParameterError(f"Invalid degree list: {text}") from e
    if not degrees:
        raise InvalidParameterError("No degree given")
    return degrees


def parse_sampler(text: str) -> SamplerSpec:
    name, _, parameter = text.partition(":")
    try:
        kind = SamplerKind(name)
        return SamplerSpec(kind=kind, parameters=(float(parameter),) if parameter else ())
    except ValueError as e:
        raise InvalidParameterError(f"Invalid --dist {text}: {e}") from e


def parse_nn_rule(args: argparse.Namespace) -> NnRule:
    given = [value is not None for value in (args.Nn, args.ratio, args.fixed_m)]
    if sum(given) > 1:
        raise InvalidParameterError(cli_messages.NN_RULE_REQUIRED)
    if args.ratio is not None:
        return NnRule(rule=PlanRule.RATIO, value=args.ratio)
    if args.fixed_m is not None:
        return NnRule(rule=PlanRule.FIXED, value=args.fixed_m)
    if args.Nn is None:
        return NnRule(rule=PlanRule.EXPLICIT, value=0)
    if args.Nn == "log":
        return NnRule(rule=PlanRule.LOG, value=None)
    try:
        return NnRule(rule=PlanRule.EXPLICIT, value=int(args.Nn))
    except ValueError as e:
        raise InvalidParameterError(f"--Nn must be an integer or 'log', got {args.Nn}") from e


def parse_annuli(values: list[str] | None) -> list[tuple[float, float]]:
    if not values:
        return list(get_settings().experiments.annuli)
    annuli = []
    for value in values:
        lo, _, hi = value.partition(":")
        try:
            annuli.append((float(lo), float(hi)))
        except ValueError as e:
            raise InvalidParameterError(f"Invalid annulus {value}, expected lo:hi") from e
    return annuli


def experiment_configs(args: argparse.Namespace, target: str | None) -> list[ExperimentConfig]:
    """One config per requested degree."""
    sampler = parse_sampler(args.dist)
    nn_rule = parse_nn_rule(args)
    target_spec = TargetSpec.parse(target) if target else None
    annuli = parse_annuli(args.annulus)
    return [
        ExperimentConfig(
            ensemble=args.ensemble,
            sampler=sampler,
            n=n,
            nn_rule=nn_rule,
            rescale=RescaleMode(args.rescale),
            trials=args.trials,
            seed=args.seed,
            out=args.out,
            target=target_spec,
            annuli=annuli,
        )
        for n in parse_degrees(args.n)
    ]


def output_dir(args: argparse.Namespace) -> Path:
    out: Path | None = getattr(args, "out", None)
    return out if out is not None else get_settings().experiments.output_dir


def file_stem(command: str, cfg: ExperimentConfig) -> str:
    ensemble = re.sub(r"[^A-Za-z0-9.-]+", "-", cfg.ensemble).strip("-")
    return f"{command}_{ensemble}_n{cfg.n}_N{cfg.plan.N_n}_seed{cfg.seed}"
