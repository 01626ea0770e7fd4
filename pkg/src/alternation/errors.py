"""Exception types shared across the package."""


class AlternationError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AlternationError):
    def __init__(self, message, offset=None, line=None):
        self.offset = offset
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        if where:
            message = f"{message} at {', '.join(where)}"
        super().__init__(message)


class AlphabetError(AlternationError):
    """A letter outside the declared alphabet, or mismatched alphabets."""


class ResourceLimitError(AlternationError):
    """A configured cap was exceeded; the computation was abandoned."""

    def __init__(self, what, limit, observed=None):
        self.what = what
        self.limit = limit
        self.observed = observed
        msg = f"{what} exceeds limit {limit}"
        if observed is not None:
            msg += f" (reached {observed})"
        super().__init__(msg)


class UnsupportedError(AlternationError):
    """The requested problem is outside what the procedures decide."""


class InternalInconsistencyError(AlternationError):
    """Two independent computations disagree; indicates a bug."""
