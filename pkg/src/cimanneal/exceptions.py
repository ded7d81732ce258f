class GSetParseError(ValueError):
    """Malformed GSet text. ``lineno`` is 1-based, or None for whole-file problems."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DivergenceError(FloatingPointError):
    """A solver produced non-finite amplitudes."""

    def __init__(self, message, run_index=None, iteration=None):
        self.run_index = run_index
        self.iteration = iteration
        super().__init__(message)


class ConfigError(ValueError):
    pass
