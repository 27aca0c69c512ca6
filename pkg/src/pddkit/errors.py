"""Exception types shared across the toolkit."""


class PddError(Exception):
    """Base class for all toolkit errors."""


class DataError(PddError):
    """Invalid or inconsistent input data. CLI maps these to exit code 1."""


class DuplicateIdError(DataError):
    """A record id that already exists in the corpus."""


class SchemaError(DataError):
    """A record violating a structural invariant (e.g. conditional fields)."""


class SpanMarkupError(DataError):
    """Unparseable span markup (odd marker count, empty span, marker in text)."""


class UnknownAnnotatorError(DataError):
    """Task or submission referencing an unregistered annotator."""


class UndefinedCorrelationError(DataError):
    """Correlation requested on a constant label vector."""


class DegenerateDataError(DataError):
    """Training data that cannot support the requested fit (single class)."""


class DegenerateVarianceError(DataError):
    """Mean comparison with zero variance in both samples but unequal means."""


class DegenerateBandwidthError(DataError):
    """Density estimation on a constant sample."""


class ModelFormatError(DataError):
    """Unreadable or version-incompatible model file."""


class WireProtocolError(PddError):
    """Transport or framing failure on the inference wire protocol."""
