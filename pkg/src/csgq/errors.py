"""Exception types shared across the package."""


class CSGError(Exception):
    """Base class for all package errors."""


class PartitionError(CSGError, ValueError):
    """A coalition structure is not a valid partition of the agents."""


class ParseError(CSGError, ValueError):
    """A graph file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class GraphValidationError(CSGError, ValueError):
    """A graph file parsed but does not describe a complete graph."""


class CapacityError(CSGError, RuntimeError):
    """Problem size exceeds a hard cap of an exact method."""
