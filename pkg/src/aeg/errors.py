"""Exception hierarchy with stable machine-readable codes.

Every error carries a ``code`` string equal to its class name; the HTTP
layer serializes errors as ``{code, message}`` using these codes, so the
names must stay stable.
"""


class AegError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class DegenerateCovariance(AegError):
    """Covariance matrix is not positive definite."""


class InvalidMatrix(AegError):
    """Matrix violates a structural requirement (e.g. not symmetric)."""


class EmptyInput(AegError):
    """Operation received an empty collection where data is required."""


class DimensionMismatch(AegError):
    """Inputs disagree on vector/matrix dimensions."""


class ClipTooShort(AegError):
    """Clip has fewer frames than one aggregation window."""

    def __init__(self, clip_id: str, frames: int, window: int):
        super().__init__(
            f"clip {clip_id!r} has {frames} frames, needs at least {window}"
        )
        self.clip_id = clip_id
        self.frames = frames
        self.window = window


class InsufficientData(AegError):
    """Not enough data points for the requested model size."""


class ModelCollapsed(AegError):
    """Every mixture component was removed during training."""


class MissingPosterior(AegError):
    """A clip referenced by annotations has no topic posterior."""


class ModelMismatch(AegError):
    """Two models are structurally incompatible."""


class NoSupportingTopics(AegError):
    """All posterior mass falls on removed topics."""


class DuplicateClip(AegError):
    """The same clip id occurs more than once."""


class ListMismatch(AegError):
    """Two collections do not cover the same items."""


class ZeroVector(AegError):
    """A vector required to be nonzero has zero norm."""


class DegenerateTruth(AegError):
    """Ground-truth values have zero variance."""


class InvalidCutoff(AegError):
    """Ranking cutoff exceeds the list length."""


class InvalidCount(AegError):
    """Requested count is out of range."""


class InvalidQueryKind(AegError):
    """Query has the wrong kind for this operation."""


class MalformedInput(AegError):
    """A data file violates its documented format."""


class UnknownClip(AegError):
    """Referenced clip id is not present in the index."""


class UnsupportedVersion(AegError):
    """Serialized bundle was written by an unknown format version."""


class CorruptBundle(AegError):
    """Serialized bundle failed structural or checksum validation."""
