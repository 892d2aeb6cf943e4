"""Exception hierarchy.

Every error carries enough context (which check, by how much) for the CLI to
print a useful message and pick an exit code.
"""


class TetraError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1

    def details(self) -> dict:
        return {}


class NonSquare(TetraError):
    exit_code = 2


class DimensionMismatch(TetraError):
    exit_code = 2


class NotAContraction(TetraError):
    pass


class DegenerateDefect(TetraError):
    exit_code = 3


class BoundaryModulus(TetraError):
    exit_code = 3


class NotUnimodular(TetraError):
    exit_code = 2


class ValidationError(TetraError):
    """A triple failed commutativity (or shape) validation."""

    def __init__(self, message, pair=None, norm=None):
        super().__init__(message)
        self.pair = pair
        self.norm = norm

    def details(self):
        return {"pair": self.pair, "norm": self.norm}


class ParseError(TetraError):
    exit_code = 2

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
        self.position = position

    def details(self):
        return {"position": self.position}


class NotIsometricInterior(TetraError):
    pass


class SymbolConditionsViolated(TetraError):
    def __init__(self, violations):
        # violations: {condition number: excess}
        detail = ", ".join(f"condition ({c}) exceeds bound by {v:.3g}"
                           for c, v in sorted(violations.items()))
        super().__init__(f"symbol pair rejected: {detail}")
        self.violations = dict(violations)

    def details(self):
        return {"violations": {str(c): v for c, v in self.violations.items()}}


class HypothesisViolated(TetraError):
    def __init__(self, message, comm_12=None, self_comm_gap=None):
        super().__init__(message)
        self.comm_12 = comm_12
        self.self_comm_gap = self_comm_gap

    def details(self):
        return {"comm_12": self.comm_12, "self_comm_gap": self.self_comm_gap}
