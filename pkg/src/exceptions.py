"""Custom exception classes for the matching engine."""


class MatcherException(Exception):
    exit_code = 1
    error_code = "INTERNAL_ERROR"
    message = "An unexpected error occurred."

    def __init__(self, message=None, exit_code=None, error_code=None, details=None):
        super().__init__(message)
        if message:
            self.message = message
        if exit_code:
            self.exit_code = exit_code
        if error_code:
            self.error_code = error_code
        self.details = details  # Offending shapes, line numbers, epochs...

    def __str__(self):
        return self.message

    def to_dict(self):
        rv = {"error_code": self.error_code, "message": self.message}
        if self.details:
            rv["details"] = self.details
        return rv


class ValidationError(MatcherException):
    exit_code = 2
    error_code = "VALIDATION_ERROR"
    message = "Input validation failed."


class GraphValidationError(ValidationError):
    error_code = "INVALID_GRAPH"
    message = "The graph violates a structural invariant."


class ParseError(ValidationError):
    error_code = "PARSE_ERROR"
    message = "The input could not be parsed."

    def __init__(self, message=None, line_number=None, **kwargs):
        super().__init__(message, **kwargs)
        self.line_number = line_number
        if line_number is not None:
            self.details = {**(self.details or {}), "line": line_number}


class ContractError(ValidationError):
    error_code = "CONTRACT_ERROR"
    message = "An operation was called outside its contract."


class ConfigError(ValidationError):
    error_code = "CONFIG_ERROR"
    message = "The experiment configuration is invalid."


class InvariantViolation(ValidationError):
    error_code = "INVARIANT_VIOLATION"
    message = "A structural invariant does not hold."


class EmptyLevelError(ValidationError):
    error_code = "EMPTY_LEVEL"
    message = "An iterated line graph level has no edges."

    def __init__(self, message=None, level=None, **kwargs):
        super().__init__(message, **kwargs)
        self.level = level
        if level is not None:
            self.details = {**(self.details or {}), "level": level}


class NumericalFailure(MatcherException):
    exit_code = 3
    error_code = "NUMERICAL_FAILURE"
    message = "A numerical failure occurred."


class NonFiniteError(NumericalFailure):
    error_code = "NON_FINITE"
    message = "A tensor contains NaN or Inf values."


class DivergenceError(NumericalFailure):
    error_code = "DIVERGENCE"
    message = "Training diverged."

    def __init__(self, message=None, epoch=None, **kwargs):
        super().__init__(message, **kwargs)
        self.epoch = epoch
        if epoch is not None:
            self.details = {**(self.details or {}), "epoch": epoch}


class MarginalViolation(NumericalFailure):
    error_code = "MARGINAL_VIOLATION"
    message = "Sinkhorn output violates the one-to-one marginals."


class CheckSuiteFailure(MatcherException):
    exit_code = 4
    error_code = "CHECK_FAILED"
    message = "One or more diagnostic checks failed."


class StorageError(MatcherException):
    error_code = "STORAGE_ERROR"
    message = "Reading or writing an artifact failed."
