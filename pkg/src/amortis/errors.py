"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates the documented preconditions."""


class CalibrationError(RuntimeError):
    """A parameter could not be recovered from a table (singular system, no root)."""


class ScenarioError(InvalidInputError):
    """A scenario document could not be parsed or validated."""
