from pathlib import Path
from typing import Callable, Optional

import click

from oblique.core.errors import ConfigError
from oblique.schemas.scenario import Scenario
from oblique.services.scenario_service import ScenarioService
from oblique.utils.validators import Validators


def _validated(check: Callable) -> Callable:
    def callback(ctx: click.Context, param: click.Parameter, value):
        if value is None:
            return None
        try:
            return check(value, f"--{param.name.replace('_', '-')}")
        except ValueError as e:
            raise click.BadParameter(str(e))

    return callback


config_option = click.option(
    "--config",
    "config",
    required=True,
    type=click.Path(dir_okay=False, path_type=Path),
    help="Scenario YAML file.",
)
horizon_option = click.option(
    "--horizon", type=float, default=None, callback=_validated(Validators.validate_positive), help="Override integration.horizon."
)
rel_tol_option = click.option(
    "--rel-tol", type=float, default=None, callback=_validated(Validators.validate_tolerance), help="Override integration.rel_tol."
)
out_option = click.option(
    "--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write the report here instead of stdout."
)
format_option = click.option(
    "--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True
)


def range_option(name: str) -> Callable:
    return click.option(
        f"--{name}",
        type=(float, float, int),
        default=None,
        callback=_validated(Validators.validate_range),
        metavar="LO HI N",
        help=f"Grid over {name}; defaults to the scenario's sweep section.",
    )


def load(config: Path, horizon: Optional[float] = None, rel_tol: Optional[float] = None) -> Scenario:
    scenario = ScenarioService.load_scenario(config)
    if horizon is not None and horizon <= scenario.ivp.t0:
        raise ConfigError(f"--horizon {horizon!r} must exceed t0={scenario.ivp.t0!r}")
    return ScenarioService.with_overrides(scenario, horizon=horizon, rel_tol=rel_tol)
