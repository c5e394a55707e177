"""Exception classes, grouped by failure class (the CLI maps each group to an exit code)."""


class ConformanceError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ConformanceError):
    """Bad input files or configuration (exit code 2)."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class StructuralError(InputError):
    """A model file that parses as XML but does not describe a valid net."""


class ConfigError(InputError):
    pass


class ModelError(ConformanceError):
    """The net cannot produce what was asked of it (exit code 3)."""


class SimulationError(ModelError):
    pass


class ResourceError(ConformanceError):
    """A configured search/state cap was exceeded (exit code 4)."""


class UndefinedStatisticError(ConformanceError):
    pass
