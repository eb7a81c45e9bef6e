"""Exception hierarchy shared across the package."""


class WfcredError(Exception):
    """Base class for all package errors."""


class WorkflowParseError(WfcredError):
    """Raised when a workflow definition cannot be turned into a graph.

    ``line`` and ``column`` are filled when the failure has a position
    (XML syntax errors, or the element that carried a bad reference).
    """

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
            if column is not None:
                where.append(f"column {column}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class HistoryError(WfcredError):
    """Malformed or inconsistent execution-history log."""


class MatrixError(WfcredError):
    """Judgment matrix file is unreadable or structurally wrong."""


class ConvergenceError(WfcredError):
    """An iterative numerical routine hit its iteration cap."""


class ConfigError(WfcredError):
    """Invalid generator or experiment configuration."""
