import json
from pathlib import Path

import pytest

from app.core.exceptions import ReportError
from app.models import EmpiricalMeasure
from app.schemas.requests import ExperimentConfig, TargetSpec
from app.schemas.responses import Report
from app.utils.experiments import resolve_target, run_trials
from app.utils.measures import ks_distance, radial_cdf
from app.utils.reports import ROOT_COLUMNS, read_roots, roots_frame, write_report


def test_csv_has_one_line_per_root_plus_header(tmp_path: Path) -> None:
    report = run_trials(ExperimentConfig(ensemble="kac", n=3, trials=2, seed=5))
    csv_path, json_path = tmp_path / "roots.csv", tmp_path / "summary.json"

    write_report(report, csv_path, json_path)

    lines = csv_path.read_text().splitlines()
    assert len(lines) == 7
    assert lines[0] == ",".join(ROOT_COLUMNS)


def test_empty_report_has_nothing_to_write(tmp_path: Path) -> None:
    report = Report(config=ExperimentConfig(ensemble="kac", n=3), plan_N_n=0, plan_D_n=3, trials=[])

    with pytest.raises(ReportError):
        write_report(report, tmp_path / "roots.csv", tmp_path / "summary.json")
    assert not (tmp_path / "roots.csv").exists()


def test_summary_json_round_trips_pooled_ks(tmp_path: Path) -> None:
    cfg = ExperimentConfig(ensemble="kac", n=50, trials=2, seed=2, target=TargetSpec.parse("kac-unit-circle"))
    report = run_trials(cfg)
    json_path = tmp_path / "summary.json"

    write_report(report, tmp_path / "roots.csv", json_path)

    summary = json.loads(json_path.read_text())
    assert summary["pooled_ks"] == report.pooled_ks
    assert summary["per_trial_ks"] == report.per_trial_ks
    assert summary["config"]["target"]["label"] == "kac-unit-circle"
    for key in ("config", "angular_discrepancy", "failed_trials", "runtime_seconds"):
        assert key in summary
    assert Report.model_validate_json(json_path.read_text()).pooled_ks == report.pooled_ks


def test_pooled_ks_recomputes_from_the_csv(tmp_path: Path) -> None:
    cfg = ExperimentConfig(ensemble="elliptic", n=80, trials=3, seed=4, target=TargetSpec.parse("elliptic-sphere"))
    report = run_trials(cfg)
    csv_path = tmp_path / "roots.csv"

    write_report(report, csv_path, tmp_path / "summary.json")

    table = read_roots(csv_path).sort_values("modulus", kind="stable")
    measure = EmpiricalMeasure(moduli=table["modulus"].to_numpy(), angles=table["angle"].to_numpy())
    recomputed = ks_distance(radial_cdf(measure), resolve_target(cfg.target))
    assert recomputed == pytest.approx(report.pooled_ks, abs=1e-15)


def test_same_seed_gives_byte_identical_csv(tmp_path: Path) -> None:
    cfg = ExperimentConfig(ensemble="elliptic", n=120, trials=2, seed=9)

    write_report(run_trials(cfg), tmp_path / "a.csv", tmp_path / "a.json")
    write_report(run_trials(cfg), tmp_path / "b.csv", tmp_path / "b.json")

    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_different_seed_changes_the_roots(tmp_path: Path) -> None:
    first = roots_frame(run_trials(ExperimentConfig(ensemble="kac", n=20, seed=1)))
    second = roots_frame(run_trials(ExperimentConfig(ensemble="kac", n=20, seed=2)))

    assert not first.equals(second)


def test_unwritable_path_is_reported_with_context(tmp_path: Path) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("")
    report = run_trials(ExperimentConfig(ensemble="kac", n=3))

    with pytest.raises(ReportError) as exc_info:
        write_report(report, blocker / "roots.csv", blocker / "summary.json")

    assert str(blocker) in str(exc_info.value)
