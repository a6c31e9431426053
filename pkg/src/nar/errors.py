"""Exception hierarchy shared across the toolkit."""


class NarError(Exception):
    """Base class for all toolkit errors."""


class FormatError(NarError):
    """File has the wrong magic, version, or field layout."""


class CorruptError(NarError):
    """File payload is truncated or fails its integrity check."""


class CapacityError(NarError):
    """A declared size exceeds a hard limit (e.g. more than 8 streams)."""


class InsufficientPointsError(NarError):
    """Operation needs more points than the cloud provides."""


class ConfigurationError(NarError):
    """Requested streams/channels/shapes are inconsistent."""


class CheckpointError(NarError):
    """Checkpoint is corrupt or incompatible with the current model config."""
