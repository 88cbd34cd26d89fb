"""Exception types shared across the package."""


class ActisumError(Exception):
    """Base class for all package-specific errors."""


class CorpusError(ActisumError):
    """Malformed corpus file or invalid document set (parse errors carry the line number)."""


class ConfigError(ActisumError):
    """Invalid run or pool configuration."""


class InvalidAcquisitionError(ActisumError):
    """Attempt to annotate a document that is not in the unlabeled pool."""


class MissingLabelError(ActisumError):
    """A selected document has no reference summary to reveal."""


class LearnerContractError(ActisumError):
    """A learner was called in violation of its contract (e.g. empty training set)."""


class WireProtocolError(ActisumError):
    """Schema-level violation of the learner wire protocol, including stale model handles."""


class TransportError(ActisumError):
    """Learner process died or the pipe broke; message carries diagnostics."""


class CalibrationError(ActisumError):
    """Cost-model calibration is underdetermined or degenerate."""


class EngineError(ActisumError):
    """The acquisition loop aborted (e.g. too many consecutive empty selections)."""
