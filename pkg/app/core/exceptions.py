from collections.abc import Sequence

# Exit codes follow the CLI contract: 1 usage error, 2 failed trial.
EXIT_USAGE = 1
EXIT_FAILED_TRIAL = 2


class ToolkitError(Exception):
    """Base error. Carries a human readable `detail` and the process exit code."""

    exit_code: int = EXIT_USAGE

    def __init__(self, detail: str, exit_code: int | None = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InvalidParameterError(ToolkitError, ValueError):
    exit_code = EXIT_USAGE


class RootFindingError(ToolkitError):
    exit_code = EXIT_FAILED_TRIAL

    def __init__(self, detail: str, converged: Sequence[bool] = ()) -> None:
        super().__init__(detail)
        self.converged = list(converged)

    @property
    def failed_count(self) -> int:
        return sum(1 for flag in self.converged if not flag)


class ReportError(ToolkitError):
    exit_code = EXIT_USAGE

    def __init__(self, detail: str, path: str | None = None) -> None:
        super().__init__(f"{detail} ({path})" if path else detail)
        self.path = path
