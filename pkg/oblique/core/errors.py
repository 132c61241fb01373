"""Error hierarchy; every error maps to a process exit code."""

import click


class ObliqueError(click.ClickException):
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(ObliqueError):
    """Scenario, YAML or validation problem."""


class ExpressionSyntaxError(ConfigError):
    def __init__(self, detail: str, offset: int = -1):
        if offset >= 0:
            detail = f"{detail} (at byte {offset})"
        super().__init__(detail)
        self.offset = offset


class EvaluationError(ObliqueError):
    """Domain error while evaluating an expression or user callable."""


class PreconditionError(ObliqueError):
    pass


class AcceptanceFailure(ObliqueError):
    exit_code = 1

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__(
            f"{len(self.failures)} acceptance check(s) failed: "
            + "; ".join(self.failures)
        )
