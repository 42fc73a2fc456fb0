"""Exception types shared across the pipeline."""


class InvalidArgument(ValueError):
    pass


class ContractViolation(RuntimeError):
    """A pluggable callable broke its interface contract."""


class FormatError(ValueError):
    """Malformed file on disk. Carries the byte offset or key name when known."""

    def __init__(self, message, *, offset=None, key=None):
        super().__init__(message)
        self.offset = offset
        self.key = key


class HomographyFailure(RuntimeError):
    """RANSAC could not produce a homography with enough support."""


class InsufficientFeatures(HomographyFailure):
    pass


class StageError(RuntimeError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
