"""Exception hierarchy for the toolkit.

Three families matter to callers: input/format validation problems
(:class:`ValidationError` and subclasses, CLI exit code 2), plain I/O
failures (``OSError``, exit code 3), and internal guards
(:class:`GuardError`, exit code 4).
"""


class RelgraphError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(RelgraphError):
    """Invalid input data or configuration."""


class GuardError(RelgraphError):
    """An internal size/resource guard refused the operation."""


# -- tensor file format ------------------------------------------------------

class TensorFormatError(ValidationError):
    """Base for malformed tensor files."""


class BadMagic(TensorFormatError):
    """File does not start with the RGT1 magic bytes."""


class UnknownDtype(TensorFormatError):
    """Unrecognized dtype code in the tensor header."""


class TruncatedPayload(TensorFormatError):
    """Payload length does not match the declared shape."""


class NonFiniteValues(TensorFormatError):
    """A float32 payload contains NaN or infinity."""


class InvalidTensor(ValidationError):
    """In-memory tensor violates shape/dtype invariants."""


# -- dataset validation ------------------------------------------------------

class ShapeMismatch(ValidationError):
    """Row counts or dimensions disagree between inputs."""


class SimplexViolation(ValidationError):
    """A probability row is outside [0, 1] or does not sum to 1."""


class LabelOutOfRange(ValidationError):
    """A label index falls outside [0, C)."""


class DimensionMismatch(ValidationError):
    """Query and reference sets have incompatible dimensions."""


# -- algorithm-level ---------------------------------------------------------

class TooLarge(GuardError):
    """Dataset exceeds the dense-matrix guard of the single-node solver."""


class InvalidPartitionSize(ValidationError):
    """Partition size outside [2, n]."""


class SubsetTooLarge(ValidationError):
    """Requested reference subset exceeds the reference set size."""


class LengthMismatch(ValidationError):
    """Score vectors of unequal length."""


class WrongKind(ValidationError):
    """Scorer kind not valid for this operation."""


class MissingInput(ValidationError):
    """A required input for the chosen scorer kind is absent."""


class PoolTooSmall(ValidationError):
    """Not enough correctly classified samples to flip."""


class NoPositives(ValidationError):
    """Average precision needs at least one positive."""


class DegenerateTruth(ValidationError):
    """AUROC/TNR need at least one positive and one negative."""


class InvalidAnchor(ValidationError):
    """Relation-map anchor index out of range."""
