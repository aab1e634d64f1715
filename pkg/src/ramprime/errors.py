"""Exception hierarchy shared by all modules.

Two families: ``InputError`` for bad arguments or data (CLI exit code 2) and
``ComputationError`` for failures while computing on valid input (exit 3).
"""


class RamprimeError(Exception):
    pass


class InputError(RamprimeError, ValueError):
    pass


class ComputationError(RamprimeError, ArithmeticError):
    pass


# input-side
class DomainError(InputError):
    pass


class RangeError(InputError):
    pass


class StepSizeInvalid(InputError):
    pass


class LimitExceeded(InputError):
    pass


class TableTooSmall(InputError):
    pass


class LengthMismatch(InputError):
    pass


class NotInvertible(InputError):
    pass


class NotApplicable(InputError):
    pass


class ParseError(InputError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class ValidationError(ParseError):
    pass


class OrderError(ParseError):
    pass


# computation-side
class ImaginaryResidual(ComputationError):
    pass


class MissingCoefficient(ComputationError):
    pass


class NoZeroFound(ComputationError):
    pass


class IncompleteCoverage(ComputationError):
    pass
