from pathlib import Path

import click

from oblique.commands.common import out_option
from oblique.core.errors import AcceptanceFailure
from oblique.services.paper_service import PaperService
from oblique.utils.writers import write_json


@click.command("verify-paper")
@out_option
@click.option(
    "--scenario-dir",
    type=click.Path(file_okay=False, exists=True, path_type=Path),
    default=None,
    help="Directory holding the built-in scenarios (defaults to the packaged copies).",
)
def verify_paper(out, scenario_dir):
    """Run the built-in acceptance suite; exit 1 if any check fails."""
    report = PaperService.verify_paper(scenario_dir)
    write_json(report.report_json(), out)
    if not report.passed:
        raise AcceptanceFailure(report.failures)
