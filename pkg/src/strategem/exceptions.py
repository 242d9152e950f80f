"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """An iterative computation did not converge.

    ``diagnostics`` carries whatever the failing routine knew when it gave up
    (iteration count, last increment, arguments).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class DegenerateModelError(ValueError):
    """A weight row has zero total variance and cannot be standardized."""


class DegenerateDataError(ValueError):
    """Sample data without variance (or an empty group) was passed to a test."""


class DimensionError(ValueError):
    """Array shapes do not agree."""


class InfeasibleRecruitmentError(RuntimeError):
    """A classification rule leaves one of the groups practically empty."""

    def __init__(self, message, p_control=None, p_patient=None):
        super().__init__(message)
        self.p_control = p_control
        self.p_patient = p_patient


class ResourceError(MemoryError):
    """A requested sample would not fit in memory."""


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""

    def __init__(self, message, line=None, field=None, table=None):
        self.reason = message
        where = []
        if line is not None:
            where.append(f"line {line}")
        if table is not None:
            where.append(f"scenario #{table}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field
        self.table = table


class PartialResultError(RuntimeError):
    """A Monte Carlo run stopped before all replications were done.

    ``completed`` is the number of finished replications and ``partial`` the
    estimates computed from them.
    """

    def __init__(self, message, completed, partial):
        super().__init__(message)
        self.completed = completed
        self.partial = partial
