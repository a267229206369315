"""Exception hierarchy shared by all scpl modules.

Every error carries a stable ``code`` string so the CLI can emit
machine-readable reports and map errors onto exit codes.
"""

from __future__ import annotations


class ScplError(Exception):
    """Base class for all scpl errors."""

    code = "E_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- input / validation ---------------------------------------------------

class InvalidInputError(ScplError):
    """One or more validators rejected the inputs of an operation."""

    code = "E_INVALID_INPUT"

    def __init__(self, violations):
        self.violations = tuple(violations)
        detail = "; ".join(f"{v.element}: {v.message}" for v in self.violations)
        super().__init__(f"invalid input: {detail}")


class UnknownFeatureError(ScplError):
    code = "E_UNKNOWN_FEATURE"


class TooLargeError(ScplError):
    code = "E_TOO_LARGE"


# --- parsing --------------------------------------------------------------

class FormatSyntaxError(ScplError):
    """Malformed document; carries a position when one is known."""

    code = "E_SYNTAX"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DuplicateNameError(ScplError):
    code = "E_DUPLICATE_NAME"


class UnknownReferenceError(ScplError):
    code = "E_UNKNOWN_REFERENCE"


# --- rewriting ------------------------------------------------------------

class RewriteError(ScplError):
    """A rewrite rule was applied outside its precondition."""

    code = "E_REWRITE"


class OptionalComposeError(RewriteError):
    code = "E_OPTIONAL_COMPOSE"


class NotSimpleError(RewriteError):
    code = "E_NOT_SIMPLE"


class NotOptionalError(RewriteError):
    code = "E_NOT_OPTIONAL"


class IsInitialError(RewriteError):
    code = "E_IS_INITIAL"


class NotSubstateError(RewriteError):
    code = "E_NOT_SUBSTATE"


class NotAndError(RewriteError):
    code = "E_NOT_AND"


class NoInitialError(RewriteError):
    code = "E_NO_INITIAL"


class EmptyCompositeError(RewriteError):
    code = "E_EMPTY_COMPOSITE"
