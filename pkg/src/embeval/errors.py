"""Exception hierarchy shared by all embeval modules.

Everything raised on purpose derives from EmbevalError. The CLI maps
NumericalError to exit code 2 and every other EmbevalError to exit code 1.
"""


class EmbevalError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EmbevalError):
    """Input violates a documented contract (shapes, names, ranges, flags)."""


class FormatError(EmbevalError):
    """A `.gbe` byte stream is malformed: bad magic, bad header, truncation."""


class IoError(EmbevalError):
    """Filesystem failure while reading or writing an artifact."""


class ShapeError(ValidationError):
    """Dimension mismatch between operands."""


class DegenerateVectorError(ValidationError):
    """A vector that must be normalizable has zero L2 norm."""


class MissingClassError(ValidationError):
    """A class required by the operation has no vectors."""


class MissingResourceError(ValidationError):
    """A registered external resource (e.g. a sentence file) is absent."""


class ParseError(ValidationError):
    """A line-oriented input file is malformed; message carries the line number."""


class InsufficientDataError(ValidationError):
    """Too few samples for the requested statistic."""


class InsufficientHitsError(ValidationError):
    """Fewer retrieval hits than requested selections."""


class DegenerateInputError(ValidationError):
    """Statistic undefined on this input (e.g. constant sequence)."""


class NumericalError(EmbevalError):
    """Computation produced non-finite values or lost positive semi-definiteness."""


class MetricWarning(UserWarning):
    """Non-fatal metric irregularity, e.g. a class with no test instances."""
