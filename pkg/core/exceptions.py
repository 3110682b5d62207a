class InstanceFormatError(ValueError):
    """An instance document is malformed; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class OracleSizeError(ValueError):
    """The LP is too large for brute-force vertex enumeration."""


class LpNumericalError(RuntimeError):
    """An Optimal simplex point failed the post-solve feasibility check."""
