"""Exception types shared across the toolkit.

Every class name doubles as the machine-readable rule name reported by
`validate` violations and by the annotation service's 400 responses.
"""


class VqsError(Exception):
    """Base class for all toolkit errors."""

    @property
    def rule(self) -> str:
        return type(self).__name__


class DimensionMismatch(VqsError):
    """Masks or grids with incompatible pixel dimensions."""


class CountMismatch(VqsError):
    """RLE counts do not sum to height*width."""


class DegeneratePolygon(VqsError):
    """Polygon with fewer than 3 vertices."""


class InvalidSimplex(VqsError):
    """Weights are negative or do not sum to 1."""


class NegativeEntry(VqsError):
    """Grid normalization received a negative cell."""


class ParseError(VqsError):
    """Dataset file failed to parse; carries file and position."""

    def __init__(self, message, path=None, line=None):
        super().__init__(message)
        self.path = path
        self.line = line


class FlaggedRecord(VqsError):
    """Operation requires an unflagged record."""


class BadMagic(VqsError):
    """Binary file does not start with the expected magic bytes."""


class TruncatedFile(VqsError):
    """Binary file ends before the declared payload."""


class DuplicateId(VqsError):
    """Two rows in a feature store share an id."""


class DimMismatch(VqsError):
    """Vector dimension differs from the configured one."""


class ShapeMismatch(VqsError):
    """Parameter and gradient shapes differ."""


class MissingFeatures(VqsError):
    """A record lacks a required feature row."""


class MissingProposals(VqsError):
    """A training question has no proposal set."""


class MissingPrediction(VqsError):
    """Evaluation found a test question without a prediction."""


class IncompleteCandidates(VqsError):
    """A multiple-choice question does not have its full candidate set."""


class IdMismatch(VqsError):
    """Prediction and ground-truth ids do not align."""


class SimplexViolation(VqsError):
    """Ensemble weights are not a valid simplex."""


class SizesExceedDataset(VqsError):
    """Requested split sizes exceed the number of images."""


class CorpusTooSmall(VqsError):
    """Corpus has fewer distinct non-stopwords than requested."""
