from pathlib import Path

import click

from oblique.commands.common import (
    config_option,
    format_option,
    horizon_option,
    load,
    out_option,
    rel_tol_option,
)
from oblique.core.errors import ObliqueError, PreconditionError
from oblique.services.lyapunov_service import LyapunovService
from oblique.services.scenario_service import ScenarioService
from oblique.utils.writers import write_json, write_residual_csv, write_trajectory_csv


def _monitor_columns(scenario, traj):
    nl, _ = ScenarioService.build_problem(scenario)
    t0 = traj.ivp.t0
    v1 = v2 = None
    if "v1" in scenario.monitors:
        v1 = [LyapunovService.v1(nl, t0, traj.state(i)).value for i in range(len(traj))]
    if "v2" in scenario.monitors:
        v2 = [LyapunovService.v2(nl, traj.state(i)).value for i in range(len(traj))]
    return v1, v2


@click.command("integrate")
@config_option
@horizon_option
@rel_tol_option
@out_option
@format_option
@click.option(
    "--emit-plot-data",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write t, x - x1 t - x2 for an asymptotically linear run.",
)
def integrate(config, horizon, rel_tol, out, fmt, emit_plot_data):
    """Run the scenario and report the trajectory, monitors and classification."""
    scenario = load(config, horizon, rel_tol)
    if not scenario.integrate:
        scenario = scenario.model_copy(update={"integrate": True})
    try:
        report, traj = ScenarioService.run_with_trajectory(scenario)
        if traj is None:
            raise ObliqueError("; ".join(report.errors) or "integration produced no trajectory")
        if fmt == "csv":
            v1, v2 = _monitor_columns(scenario, traj)
            write_trajectory_csv(traj, out, v1, v2)
        else:
            write_json(report.report_json(), out)
        if emit_plot_data is not None:
            cls = report.classification
            if cls is None or cls.kind != "AsymptoticallyLinear":
                kind = cls.kind if cls else "unclassified"
                raise PreconditionError(f"plot data needs an asymptotically linear run, got {kind}")
            write_residual_csv(traj, cls.x1, cls.x2, emit_plot_data)
    except ObliqueError as e:
        raise e
    except Exception as e:
        raise ObliqueError(f"Failed to integrate scenario: {str(e)}")
