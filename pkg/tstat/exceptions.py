"""Exception types surfaced by the library and mapped to CLI exit codes."""


class TstatError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1

    def to_record(self):
        """Machine-readable error record written by the CLI."""
        return {
            "status": "error",
            "exit_code": self.exit_code,
            "error": type(self).__name__,
            "field": getattr(self, 'field', None),
            "message": str(self),
        }


class ValidationError(TstatError, ValueError):
    """Invalid parameter or manifest field."""

    exit_code = 1

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class NumericalError(TstatError, ArithmeticError):
    """Quadrature did not converge or a root could not be located."""

    exit_code = 2
