import json
from pathlib import Path

import pandas as pd
import pytest

from app.core.config import get_settings
from app.core.exceptions import EXIT_FAILED_TRIAL, EXIT_USAGE
from app.main import main
from app.schemas.responses import SimulateSummary


def test_simulate_writes_roots_and_summary(output_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    exit_code = main(["simulate", "--ensemble", "kac", "--n", "30", "--trials", "2", "--seed", "3"])

    assert exit_code == 0
    roots = pd.read_csv(output_dir / "simulate_kac_n30_N0_seed3_roots.csv")
    assert len(roots) == 60
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["n"] == 30
    assert summary["failed_trials"] == []
    assert Path(summary["summary"]).exists()


def test_simulate_runs_every_degree_in_a_list(tmp_path: Path) -> None:
    exit_code = main(["simulate", "--n", "10,20", "--Nn", "5", "--out", str(tmp_path)])

    assert exit_code == 0
    assert (tmp_path / "simulate_kac_n10_N5_seed0_roots.csv").exists()
    assert (tmp_path / "simulate_kac_n20_N5_seed0_roots.csv").exists()


def test_compare_reports_ks_against_target(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    exit_code = main(
        ["compare", "--n", "100", "--ratio", "0.5", "--target", "kac-a:0.5", "--trials", "2", "--out", str(tmp_path)]
    )

    assert exit_code == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert 0.0 <= summary["pooled_ks"] <= 1.0
    assert summary["N_n"] == 50


def test_compare_needs_a_target(tmp_path: Path) -> None:
    assert main(["compare", "--n", "10", "--out", str(tmp_path)]) == EXIT_USAGE


def test_conflicting_order_options_are_a_usage_error(tmp_path: Path) -> None:
    assert main(["simulate", "--n", "10", "--Nn", "2", "--ratio", "0.5", "--out", str(tmp_path)]) == EXIT_USAGE


def test_order_not_below_degree_is_a_usage_error(tmp_path: Path) -> None:
    assert main(["simulate", "--n", "10", "--Nn", "10", "--out", str(tmp_path)]) == EXIT_USAGE


def test_unknown_ensemble_is_a_usage_error(tmp_path: Path) -> None:
    assert main(["simulate", "--ensemble", "weyl", "--n", "10", "--out", str(tmp_path)]) == EXIT_USAGE


def test_failed_trial_exits_with_two(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("ROOTFIND__MAX_ITERATIONS", "1")
    get_settings.cache_clear()

    assert main(["simulate", "--n", "100", "--out", str(tmp_path)]) == EXIT_FAILED_TRIAL


def test_missing_required_option_exits_with_usage_code() -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["simulate"])

    assert exc_info.value.code == EXIT_USAGE


def test_unknown_command_exits_with_usage_code() -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["plot"])

    assert exc_info.value.code == EXIT_USAGE


def test_limit_prints_table_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    exit_code = main(["limit", "--target", "kac-rescaled", "--grid", "0.5:1.5:0.5"])

    assert exit_code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["r,cdf", "0.5,0.5", "1,1", "1.5,1"]


def test_limit_writes_table_to_file(tmp_path: Path) -> None:
    out = tmp_path / "limits" / "elliptic.csv"

    assert main(["limit", "--target", "elliptic-rescaled", "--grid", "1:2:1", "--out", str(out)]) == 0

    table = pd.read_csv(out)
    assert table["cdf"].iloc[0] == pytest.approx((5**0.5 - 1) / 2, rel=1e-15)


def test_limit_rejects_a_bad_grid() -> None:
    assert main(["limit", "--target", "kac-rescaled", "--grid", "2:1:0.5"]) == EXIT_USAGE


def test_check_fit_prints_diagnostics(capsys: pytest.CaptureFixture[str]) -> None:
    exit_code = main(["check-fit", "--ensemble", "kac", "--n", "100,200", "--Nn", "50"])

    assert exit_code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["sup_deviation"] == [0.0, 0.0]
    assert report["eta"] == [0.0, 0.0]
    assert report["N_n"] == [50, 50]


def test_fixed_degree_prints_distances(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "fixed.json"

    exit_code = main(["fixed-degree", "--fixed-m", "3", "--n", "100,1000", "--seed", "2", "--out", str(out)])

    assert exit_code == 0
    report = json.loads(out.read_text())
    assert len(report["max_pairing_distance"]) == 2
    assert len(report["limit_roots"]) == 3
    assert json.loads(capsys.readouterr().out) == report


def test_fixed_degree_rejects_other_ensembles() -> None:
    assert main(["fixed-degree", "--ensemble", "counterexample", "--fixed-m", "3", "--n", "100"]) == EXIT_USAGE


def test_log_level_option_is_case_insensitive() -> None:
    assert main(["--log-level", "debug", "limit", "--target", "kac-rescaled", "--grid", "1:2:1"]) == 0
    assert main(["--log-level", "chatty", "limit", "--target", "kac-rescaled", "--grid", "1:2:1"]) == EXIT_USAGE


def test_simulate_stdout_line_is_a_summary_model(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["simulate", "--n", "12,16", "--Nn", "4", "--out", str(tmp_path)]) == 0

    lines = capsys.readouterr().out.splitlines()
    summaries = [SimulateSummary.model_validate_json(line) for line in lines]
    assert [s.D_n for s in summaries] == [8, 12]
    assert all(s.N_n == 4 and s.pooled_ks is None for s in summaries)
    assert all(s.annulus_fractions.keys() == {"0.9-1.1"} for s in summaries)
