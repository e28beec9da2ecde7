"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Infeasible or out-of-range parameter combination."""


class DataFormatError(ValueError):
    """Malformed or invariant-violating data in a file or record."""


class ConfigError(ValueError):
    """Bad pipeline configuration (file, CLI flag, or environment override)."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
