"""Shared exception types. Every error carries a short machine-parseable code."""


class MvsdError(Exception):
    """Base class; `code` is stable and safe to grep in CLI output."""

    code = "error"


class ParseError(MvsdError):
    code = "parse"


class ValidationError(MvsdError):
    code = "validation"


class ArgumentError(MvsdError, ValueError):
    code = "argument"


class DimensionError(MvsdError, ValueError):
    code = "dimension"


class NumericError(MvsdError, RuntimeError):
    code = "numeric"


class AuthorizationError(MvsdError):
    code = "authorization"


class ConflictError(MvsdError):
    code = "conflict"


class ConfigurationError(MvsdError):
    code = "configuration"
