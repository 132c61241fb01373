import csv
import io
from pathlib import Path
from typing import Iterable, Optional, Sequence

import click
import numpy as np

from oblique.schemas.integration import Trajectory
from oblique.schemas.run import SweepReport
from oblique.utils.helpers import format_float


TRAJECTORY_COLUMNS = ("t", "x", "xp", "u", "v", "V1", "V2")
RESIDUAL_COLUMNS = ("t", "residual")


def _cell(value: Optional[float]) -> str:
    return "" if value is None else format_float(value)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    Path(out).write_text(text, encoding="utf-8")


def write_json(text: str, out: Optional[Path] = None) -> None:
    """Write a serialized report to ``out`` or stdout, newline terminated."""
    _emit(text if text.endswith("\n") else text + "\n", out)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trajectory_csv(
    traj: Trajectory,
    v1: Optional[Sequence[float]] = None,
    v2: Optional[Sequence[float]] = None,
) -> str:
    """Columns t, x, xp, u, v, V1, V2; a monitor column is empty when not requested."""
    x, xp = traj.x, traj.xp
    rows = []
    for i in range(len(traj)):
        rows.append(
            [
                _cell(traj.t[i]),
                _cell(x[i]),
                _cell(xp[i]),
                _cell(traj.u[i]),
                _cell(traj.v[i]),
                _cell(v1[i]) if v1 is not None else "",
                _cell(v2[i]) if v2 is not None else "",
            ]
        )
    return _csv_text(TRAJECTORY_COLUMNS, rows)


def write_trajectory_csv(
    traj: Trajectory,
    out: Optional[Path] = None,
    v1: Optional[Sequence[float]] = None,
    v2: Optional[Sequence[float]] = None,
) -> None:
    _emit(trajectory_csv(traj, v1, v2), out)


def residual_csv(traj: Trajectory, x1: float, x2: float) -> str:
    residual = traj.x - x1 * traj.t - x2
    rows = ([_cell(t), _cell(r)] for t, r in zip(traj.t, np.asarray(residual)))
    return _csv_text(RESIDUAL_COLUMNS, rows)


def write_residual_csv(traj: Trajectory, x1: float, x2: float, out: Path) -> None:
    _emit(residual_csv(traj, x1, x2), out)


SWEEP_COLUMNS = ("x0", "xp0", "kind", "x1", "x2", "t_inf_estimate", "threshold_margin", "error")


def sweep_csv(report: SweepReport) -> str:
    rows = []
    for p in report.points:
        cls = p.classification
        rows.append(
            [
                _cell(p.x0),
                _cell(p.xp0),
                cls.kind if cls else "",
                _cell(cls.x1 if cls else None),
                _cell(cls.x2 if cls else None),
                _cell(cls.t_inf_estimate if cls else None),
                _cell(p.threshold_margin),
                p.error or "",
            ]
        )
    return _csv_text(SWEEP_COLUMNS, rows)


def write_sweep_csv(report: SweepReport, out: Optional[Path] = None) -> None:
    _emit(sweep_csv(report), out)
