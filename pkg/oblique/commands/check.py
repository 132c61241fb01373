import click

from oblique.commands.common import config_option, load, out_option
from oblique.core.errors import ObliqueError
from oblique.services.scenario_service import ScenarioService
from oblique.utils.writers import write_json


@click.command("check")
@config_option
@out_option
def check(config, out):
    """Evaluate the scenario's hypothesis checks without integrating."""
    scenario = load(config)
    try:
        report = ScenarioService.run(scenario.model_copy(update={"integrate": False}))
    except ObliqueError as e:
        raise e
    except Exception as e:
        raise ObliqueError(f"Failed to check scenario: {str(e)}")
    write_json(report.report_json(), out)
