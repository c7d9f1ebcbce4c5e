"""Exception hierarchy shared by every rdlab module."""


class RDLabError(Exception):
    """Base class for all errors raised by rdlab."""


class InvalidFieldError(RDLabError, ValueError):
    pass


class InvalidParameterError(RDLabError, ValueError):
    pass


class UnsupportedBoundaryError(RDLabError, ValueError):
    pass


class ExpressionSyntaxError(RDLabError, ValueError):
    """Raised by the parser; carries the byte offset of the offending token."""

    def __init__(self, message, offset, text=None):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class UnboundVariableError(RDLabError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"variable {self.name!r} is not bound"


class NonFiniteResultError(RDLabError, ArithmeticError):
    pass


class UnknownFamilyError(RDLabError, KeyError):
    pass


class MissingParameterError(RDLabError, KeyError):
    pass


class LinearSolveError(RDLabError, RuntimeError):
    pass


class InvalidInputError(RDLabError, ValueError):
    pass


class ConfigError(RDLabError, ValueError):
    """Scenario/sweep configuration problem; ``pointer`` is a JSON pointer."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


class ScenarioError(RDLabError, RuntimeError):
    """A component failure during a scenario run, tagged with the scenario name."""

    def __init__(self, scenario, cause):
        self.scenario = scenario
        self.cause = cause
        super().__init__(f"scenario {scenario!r}: {cause}")
