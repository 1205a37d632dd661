"""Exception types shared across the package."""


class FoalError(Exception):
    """Base class for all errors raised by this package."""


class FeatureFileError(FoalError):
    """Raised when a feature file is malformed or unreadable.

    ``offset`` is the byte offset of the problem when known, ``sample_index``
    the zero-based index of the offending sample when known.
    """

    def __init__(self, path, message, *, offset=None, sample_index=None):
        self.path = str(path)
        self.offset = offset
        self.sample_index = sample_index
        where = []
        if offset is not None:
            where.append(f"offset {offset}")
        if sample_index is not None:
            where.append(f"sample {sample_index}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{self.path}: {message}{suffix}")


class ManifestError(FoalError):
    """Raised when a stream manifest violates one of its invariants.

    ``check`` names the violated invariant so callers can tell validation
    failures apart.
    """

    def __init__(self, check, message):
        self.check = check
        super().__init__(f"[{check}] {message}")


class NotPositiveDefiniteError(FoalError):
    """Raised when the small per-batch system is numerically indefinite."""

    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition number ~ {condition:.3e})"
        super().__init__(message)
