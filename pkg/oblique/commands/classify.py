import click

from oblique.commands.common import config_option, horizon_option, load, out_option, rel_tol_option
from oblique.core.errors import ObliqueError
from oblique.services.scenario_service import ScenarioService
from oblique.utils.writers import write_json


@click.command("classify")
@config_option
@horizon_option
@rel_tol_option
@out_option
def classify(config, horizon, rel_tol, out):
    """Integrate without monitors or checks and print the classification."""
    scenario = load(config, horizon, rel_tol)
    scenario = scenario.model_copy(update={"integrate": True, "checks": [], "monitors": []})
    try:
        report = ScenarioService.run(scenario)
    except ObliqueError as e:
        raise e
    except Exception as e:
        raise ObliqueError(f"Failed to classify scenario: {str(e)}")
    if report.classification is None:
        raise ObliqueError("; ".join(report.errors) or "no classification was produced")
    write_json(
        report.model_dump_json(include={"classification", "estimate", "trajectory", "errors", "timings"}, indent=2),
        out,
    )
