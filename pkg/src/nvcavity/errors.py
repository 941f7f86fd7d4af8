"""Exception types shared across the toolkit.

Each error carries the owning module name and a short machine-readable
code; the CLI prints them as ``ERROR:<module>:<code>``.
"""


class ToolkitError(ValueError):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, *, module: str = "core", code: str | None = None):
        super().__init__(message)
        self.module = module
        if code is not None:
            self.code = code


class DomainError(ToolkitError):
    """An input violates a physical or mathematical precondition."""

    code = "domain"


class ValidationError(ToolkitError):
    """A file or configuration failed structural validation."""

    code = "validation"


class NoSolutionError(ToolkitError):
    """A root/inverse solve has no solution in its search range."""

    code = "no_solution"


class SingularityError(ToolkitError):
    """Evaluation point coincides with a field source."""

    code = "singularity"


class NoSplittingError(ToolkitError):
    """A spectrum does not contain two resolvable peaks."""

    code = "no_splitting"


class FitConvergenceError(ToolkitError):
    """Fit did not converge; carries the best state reached so far."""

    code = "fit_nonconverged"

    def __init__(self, message: str, *, module: str = "spectroscopy", best=None):
        super().__init__(message, module=module)
        self.best = best
