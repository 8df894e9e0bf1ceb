"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and input problems
(InvalidArgumentError, DegenerateGeometryError, GeometryError, ParseError,
MeshIOError) exit with 2, numeric failures (NumericError and subclasses)
exit with 3.
"""


class ElastimeshError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(ElastimeshError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometryError(ElastimeshError, ValueError):
    """Input geometry is degenerate (e.g. all fit points coincide)."""


class GeometryError(ElastimeshError, ValueError):
    """Domain geometry is inconsistent (e.g. boundary corners do not meet)."""


class DegenerateCellError(ElastimeshError, ValueError):
    """A mesh cell has a zero-length edge.

    Carries the flat cell index so the offending quad can be located.
    """

    def __init__(self, cell_index: int, message: str | None = None):
        self.cell_index = cell_index
        super().__init__(message or f"degenerate cell at index {cell_index}")


class ParseError(ElastimeshError, ValueError):
    """A file could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class MeshIOError(ElastimeshError, OSError):
    """Reading or writing a mesh file failed; carries the path."""

    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


class NumericError(ElastimeshError, ArithmeticError):
    """A numeric evaluation produced a non-finite or undefined value."""


class DomainEvaluationError(NumericError):
    """A primitive was evaluated at a singular point; names the operation."""

    def __init__(self, op: str, message: str | None = None):
        self.op = op
        super().__init__(message or f"singular evaluation in op '{op}'")


class TrainingDivergedError(NumericError):
    """The training loss became non-finite; carries the epoch number."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")
