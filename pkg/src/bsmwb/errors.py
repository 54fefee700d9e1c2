"""Error taxonomy shared by all modules, mapped to CLI exit codes."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""

    exit_code = 1


class RejectedInput(WorkbenchError):
    """Input violates a precondition (wrong shape, arity, width, ...)."""

    exit_code = 4


class ParseError(WorkbenchError):
    """A file could not be parsed.  Carries line (1-based) when known."""

    exit_code = 4

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class CapacityError(WorkbenchError):
    """A configured search or size limit would be exceeded."""

    exit_code = 3


class IntegrityError(WorkbenchError):
    """A declared cost disagrees with its recomputation."""

    exit_code = 2


class MalformedProtocol(WorkbenchError):
    """A protocol produced an out-of-alphabet symbol or is internally broken."""

    exit_code = 2


class VerificationMismatch(WorkbenchError):
    """A protocol disagrees with its declared target function."""

    exit_code = 2


class DemoConfigError(WorkbenchError):
    """A demo oracle/budget configuration is internally inconsistent."""

    exit_code = 1
