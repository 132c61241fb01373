import click

from oblique.commands.common import (
    config_option,
    format_option,
    horizon_option,
    load,
    out_option,
    range_option,
    rel_tol_option,
)
from oblique.core.errors import ConfigError, ObliqueError
from oblique.schemas.scenario import Range
from oblique.services.scenario_service import ScenarioService
from oblique.utils.writers import write_json, write_sweep_csv


def _axis(given, fallback, name: str) -> Range:
    if given is not None:
        lo, hi, count = given
        return Range(lo=lo, hi=hi, count=count)
    if fallback is None:
        raise ConfigError(f"--{name} is required when the scenario has no sweep section")
    return fallback


@click.command("sweep")
@config_option
@range_option("x0")
@range_option("xp0")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes.")
@horizon_option
@rel_tol_option
@out_option
@format_option
@click.option("--progress/--no-progress", default=False, help="Show a progress bar on stderr.")
def sweep(config, x0, xp0, workers, horizon, rel_tol, out, fmt, progress):
    """Classify every (x0, xp0) on a grid, keeping t0 and the problem fixed."""
    scenario = load(config, horizon, rel_tol)
    section = scenario.sweep
    x0_axis = _axis(x0, section.x0 if section else None, "x0")
    xp0_axis = _axis(xp0, section.xp0 if section else None, "xp0")
    if workers is None and section is not None:
        workers = section.workers
    try:
        report = ScenarioService.sweep(scenario, x0_axis, xp0_axis, workers=workers, progress=progress)
    except ObliqueError as e:
        raise e
    except Exception as e:
        raise ObliqueError(f"Failed to sweep scenario: {str(e)}")
    if fmt == "csv":
        write_sweep_csv(report, out)
    else:
        write_json(report.model_dump_json(indent=2), out)
