"""Exception types shared across the package."""


class RelstreamError(Exception):
    """Base class for package-specific failures."""


class EmbeddingFormatError(RelstreamError):
    """Malformed or truncated embedding file."""


class CorpusFormatError(RelstreamError):
    """Malformed corpus file; message carries file/line context."""


class CheckpointError(RelstreamError):
    """Unreadable model checkpoint."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by a newer format version."""


class ChecksumError(CheckpointError):
    """Checkpoint payload does not match its CRC32."""


class TrainingError(RelstreamError):
    """Invalid training request (empty or fully degenerate batch)."""
