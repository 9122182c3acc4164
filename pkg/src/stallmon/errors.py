class StallError(Exception):
    """Base class for errors the CLI reports with exit code 2."""


class ConfigError(StallError, ValueError):
    pass


class InputError(StallError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderError(StallError, ValueError):
    """Clip or frame arrived out of order."""
