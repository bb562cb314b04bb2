"""Exception hierarchy shared by every layer of the package."""


class NHLError(Exception):
    """Base class for all package errors."""


class FieldError(NHLError):
    """Invalid field construction or a non-invertible element."""


class NotInSpanError(NHLError):
    """A vector was expected to lie in a span and does not."""


class ShapeError(NHLError):
    """Dimension mismatch between matrices, vectors or subspaces."""


class ParseError(NHLError):
    """Malformed algebra document.  ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.reason = message


class HypothesisError(NHLError):
    """An input violates a mathematical precondition (Filippov, arity, dimension)."""


class MemoryCapError(NHLError):
    """A chain space would exceed the configured column cap."""


class SubcomplexError(NHLError):
    """A boundary restricted to a claimed subcomplex leaves the subcomplex."""


class ChainMapError(NHLError):
    """A per-degree map does not commute with the boundaries."""
