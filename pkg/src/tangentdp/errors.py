"""Exception types raised across the package."""


class TangentDPError(ValueError):
    """Base class for all validation errors raised by tangentdp."""


class LengthMismatch(TangentDPError):
    pass


class NegativeWeight(TangentDPError):
    pass


class ZeroMass(TangentDPError):
    pass


class NotNormalized(TangentDPError):
    pass


class NotZeroSum(TangentDPError):
    pass


class NotEmpirical(TangentDPError):
    pass


class BadIndex(TangentDPError):
    pass


class Disconnected(TangentDPError):
    pass


class SolverFailure(TangentDPError):
    pass


class SpaceMismatch(TangentDPError):
    pass


class MissingLaplacian(TangentDPError):
    pass


class StepTooLarge(TangentDPError):
    def __init__(self, step: float, message: str | None = None):
        self.step = step
        super().__init__(message or f"step h={step!r} moves p outside the probability simplex")


class ConfigError(TangentDPError):
    """Invalid audit configuration (bad beta, missing graph, unknown pair...)."""


class MissingGraph(ConfigError):
    pass


class ParseError(TangentDPError):
    """Malformed input file. ``row`` is the 1-based line number when known."""

    def __init__(self, path, row: int | None, message: str):
        self.path = str(path)
        self.row = row
        where = f"{self.path}:{row}" if row is not None else self.path
        super().__init__(f"{where}: {message}")
