"""Exception hierarchy shared by every module."""


class PhyAuthError(Exception):
    """Base class for all library errors."""


class ParameterError(PhyAuthError, ValueError):
    """Invalid argument: wrong length, out-of-range value, bad shape."""


class DomainError(ParameterError):
    """Argument outside the open domain of a mathematical function."""


class CapabilityError(PhyAuthError):
    """Requested an exhaustive operation on a non-enumerable instance."""


class CalibrationError(PhyAuthError):
    """Threshold calibration could not meet the requested false-alarm rate."""


class NumericalError(PhyAuthError, ArithmeticError):
    """Root finding or quadrature failed to converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class ConfigError(PhyAuthError, ValueError):
    """Malformed experiment configuration."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
