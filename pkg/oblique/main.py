import click

from oblique.commands import check, classify, integrate, sweep, verify
from oblique.core.config import settings
from oblique.core.logging import configure_logging


@click.group(name=settings.APP_NAME)
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
def cli(verbose: int):
    """Analyze x'' + f(t, x/t) = 0: hypotheses, trajectories, asymptotics."""
    level = {0: None, 1: "INFO"}.get(verbose, "DEBUG")
    configure_logging(level)


cli.add_command(check.check)
cli.add_command(integrate.integrate)
cli.add_command(classify.classify)
cli.add_command(sweep.sweep)
cli.add_command(verify.verify_paper)
