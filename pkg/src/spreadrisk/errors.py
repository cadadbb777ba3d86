"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`SpreadRiskError`. The two main branches map onto CLI exit codes:
input/validation problems exit with 1, numerical failures with 2.
"""


class SpreadRiskError(Exception):
    exit_code = 1


class ValidationError(SpreadRiskError, ValueError):
    """Input data or configuration violates a documented contract."""

    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class SchemaError(ValidationError):
    pass


class DomainError(ValidationError):
    """A value lies outside the domain of a transformation or formula."""


class ConfigError(ValidationError):
    pass


class GapError(ValidationError):
    """A month that should carry a value has none."""


class NumericError(SpreadRiskError, ArithmeticError):
    exit_code = 2


class SingularDesignError(NumericError):
    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)


class InsufficientDataError(NumericError):
    pass


class DegenerateInputError(NumericError):
    pass


class EmptySelectionError(NumericError):
    pass


class ThinRegimeError(NumericError):
    pass


class PipelineError(SpreadRiskError):
    """Wraps a stage failure with the stage name and a remediation hint."""

    def __init__(self, stage, cause, hint=""):
        self.stage = stage
        self.cause = cause
        self.hint = hint
        if isinstance(cause, OSError):
            self.exit_code = 3
        else:
            self.exit_code = getattr(cause, "exit_code", 1 if isinstance(cause, ValueError) else 2)
        msg = f"[{stage}] {cause}"
        if hint:
            msg += f" (hint: {hint})"
        super().__init__(msg)
