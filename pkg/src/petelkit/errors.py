"""Exception hierarchy shared across the package."""


class PetelkitError(Exception):
    """Base class for all domain errors raised by this package."""


class SchemaError(PetelkitError, ValueError):
    """A schema document violates a structural rule."""


class VectorFormatError(PetelkitError, ValueError):
    """A word-vector file is malformed (ragged rows, bad numbers, empty)."""


class PetelFormatError(PetelkitError, ValueError):
    """A PeTEL document is malformed or violates a distribution invariant."""


class ExtractionError(PetelkitError):
    """Base class for salient-phrase extraction failures."""


class EmptyUtteranceError(ExtractionError, ValueError):
    """The utterance contains no extractable content."""


class ExtractorTransportError(ExtractionError):
    """The remote extraction endpoint could not be reached."""


class MalformedResponseError(ExtractionError):
    """The remote extraction endpoint returned an unparseable payload."""


class SpanMismatchError(ExtractionError):
    """A returned span does not slice the utterance to the claimed text."""


class SessionError(PetelkitError):
    """Base class for interactive-session protocol violations."""


class SlotBoundError(SessionError):
    """The operation targets a slot that is already bound."""


class SlotExhaustedError(SessionError):
    """Every candidate of the slot has been rejected."""


class NotProposedError(SessionError):
    """Feedback names a candidate that is not the outstanding proposal."""


class TemplateError(PetelkitError, ValueError):
    """A template line is malformed or names an unknown slot."""


class AlignmentError(PetelkitError, ValueError):
    """A label span does not align with token boundaries."""


class EvaluationError(PetelkitError, ValueError):
    """A validation set or metric input is unusable."""


class AllZeroDifferencesError(EvaluationError):
    """Every paired difference is zero; the signed-rank test is undefined."""


class VersionConflictError(PetelkitError):
    """An optimistic write lost the race against a concurrent mutation."""
