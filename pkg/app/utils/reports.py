from pathlib import Path

import numpy as np
import pandas as pd

from app.cli import cli_messages
from app.cli.logger import get_logger
from app.core.exceptions import ReportError
from app.schemas.responses import Report
from app.utils.measures import polar_coordinates

logger = get_logger(__name__)

ROOT_COLUMNS = ["trial", "re", "im", "modulus", "angle"]
CSV_FLOAT_FORMAT = "%.17g"


def roots_frame(report: Report) -> pd.DataFrame:
    """One row per root of every successful trial, trials in index order."""
    blocks = []
    for trial in report.successful:
        moduli, angles = polar_coordinates(trial.roots)
        blocks.append(
            pd.DataFrame(
                {
                    "trial": np.full(trial.roots.shape[0], trial.trial, dtype=np.int64),
                    "re": trial.roots.real,
                    "im": trial.roots.imag,
                    "modulus": moduli,
                    "angle": angles,
                }
            )
        )
    if not blocks:
        return pd.DataFrame(columns=ROOT_COLUMNS)
    return pd.concat(blocks, ignore_index=True)


def write_report(report: Report, csv_path: str | Path, json_path: str | Path) -> None:
    """
    Persist the per-root CSV and the JSON summary.

    Args:
        report: report with at least one successful trial
        csv_path: destination of the `trial,re,im,modulus,angle` table
        json_path: destination of the summary
    """
    csv_path, json_path = Path(csv_path), Path(json_path)
    frame = roots_frame(report)
    if frame.empty:
        raise ReportError(cli_messages.NOTHING_TO_WRITE, path=str(csv_path))

    for path in (csv_path, json_path):
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ReportError(f"Cannot create output directory: {e.strerror}", path=str(path.parent)) from e

    try:
        frame.to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ReportError(f"Cannot write roots table: {e.strerror}", path=str(csv_path)) from e
    logger.info(f"Wrote {len(frame)} roots to {csv_path}")

    try:
        json_path.write_text(report.model_dump_json(indent=2) + "\n")
    except OSError as e:
        raise ReportError(f"Cannot write summary: {e.strerror}", path=str(json_path)) from e
    logger.info(f"Wrote summary to {json_path}")


def read_roots(csv_path: str | Path) -> pd.DataFrame:
    try:
        return pd.read_csv(csv_path, float_precision="round_trip")
    except OSError as e:
        raise ReportError(f"Cannot read roots table: {e}", path=str(csv_path)) from e
