"""Exception types shared across the lab."""


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class PreconditionError(ValueError):
    """An operation's stated precondition was violated."""


class InputError(ValueError):
    """A value argument is out of range or otherwise invalid."""


class NumericError(RuntimeError):
    """A numerical procedure failed (non-convergence, NaN divergence)."""


class UnsupportedConfigError(ValueError):
    """The requested configuration is outside what the operation supports."""


class ConfigError(ValueError):
    """A run configuration file is malformed or inconsistent."""
