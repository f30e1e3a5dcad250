class InfodistError(ValueError):
    """Base class for all errors raised by infodist."""


class DimensionMismatchError(InfodistError):
    pass


class InvariantError(InfodistError):
    """An object failed one of its structural invariants.

    ``invariant`` names the check and ``residual`` carries the measured
    violation so callers (the CLI in particular) can report both.
    """

    def __init__(self, invariant: str, residual: float, tolerance: float, detail: str = ""):
        self.invariant = invariant
        self.residual = float(residual)
        self.tolerance = float(tolerance)
        msg = f"{invariant} violated: residual {self.residual:.3e} exceeds tolerance {self.tolerance:.1e}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class ImpossibleOutcomeError(InfodistError):
    pass


class SchemaError(InfodistError):
    """Malformed JSON input; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConfigError(InfodistError):
    pass


class ReportWriteError(InfodistError):
    pass
