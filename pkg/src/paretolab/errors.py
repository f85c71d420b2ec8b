"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Caller supplied an argument that violates a precondition."""


class NumericError(RuntimeError):
    """A numerical routine failed beyond recoverable tolerance."""


class NotFound(KeyError):
    """A referenced entity (grid point, campaign file) does not exist."""


class CampaignFormatError(ValueError):
    """A persisted campaign document could not be parsed."""

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
        self.location = location


class UnsupportedVersion(CampaignFormatError):
    """A persisted campaign document has a newer format version."""


class EvaluationAborted(RuntimeError):
    """The measurement callback failed; the run state is preserved."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state
