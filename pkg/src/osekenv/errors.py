"""Exception types shared across the toolchain."""

from __future__ import annotations


class OsekEnvError(Exception):
    """Base class for all errors raised by osekenv."""


class SourceSyntaxError(SyntaxError, OsekEnvError):
    """A construct outside the accepted input grammar.

    Carries the standard ``filename``/``lineno`` attributes of
    :class:`SyntaxError` so callers can point at the offending line.
    """

    def __init__(self, msg: str, filename: str = "<input>", lineno: int = 0, text: str | None = None):
        super().__init__(msg, (filename, lineno, 0, text))

    def __str__(self) -> str:
        return f"{self.filename}:{self.lineno}: {self.msg}"


class ValidationError(ValueError, OsekEnvError):
    """Input parsed but breaks a structural invariant."""


class MalformedFactError(ValueError, OsekEnvError):
    def __init__(self, msg: str, lineno: int):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class ConsistencyError(ValueError, OsekEnvError):
    """Fact set references entities that were never declared."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(f"{len(self.problems)} dangling reference(s): " + "; ".join(self.problems))


class UnknownFunction(KeyError, OsekEnvError):
    pass


class UnknownVariable(KeyError, OsekEnvError):
    pass


class UnknownApi(KeyError, OsekEnvError):
    pass


class UnknownObject(KeyError, OsekEnvError):
    pass


class PreconditionViolation(RuntimeError, OsekEnvError):
    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation


class BindingError(KeyError, OsekEnvError):
    pass


class EmptySlice(ValueError, OsekEnvError):
    pass


class UnknownIdentifierWarning(UserWarning):
    """A property names something that is not a variable of the code graph."""


class EmptyResultWarning(UserWarning):
    """No public API reaches any end-level function."""
