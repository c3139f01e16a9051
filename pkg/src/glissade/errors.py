"""Exception types raised by the glissade pipeline.

Every stage raises a subclass of :class:`GlissadeError`, so callers can
catch one base type at the CLI boundary and map it to a diagnostic.
"""


class GlissadeError(Exception):
    """Base class for all errors raised by this package."""


# --- ingestion ---

class MalformedRow(GlissadeError):
    """A CSV row could not be parsed (wrong arity or non-numeric field)."""

    def __init__(self, row_index: int, reason: str):
        self.row_index = row_index
        super().__init__(f"row {row_index}: {reason}")


class EmptyInput(GlissadeError):
    """No usable data rows or samples."""


class NonMonotonicTime(GlissadeError):
    """Timestamps are not strictly increasing."""


# --- preprocessing ---

class EvenWindow(GlissadeError):
    """Median filter window must be odd."""


class TooShort(GlissadeError):
    """Signal shorter than the operator support."""


class NonPositiveStep(GlissadeError):
    """Sampling step must be positive."""


# --- segmentation ---

class EmptyOnsets(GlissadeError):
    """No onsets supplied to split on."""


class DegenerateProfile(GlissadeError):
    """Profile has no usable structure (e.g. all zeros)."""


# --- fitting ---

class TooFewPoints(GlissadeError):
    """Fewer samples than model parameters."""


class NonFiniteResidual(GlissadeError):
    """Fit diverged to non-finite residuals."""


class LengthMismatch(GlissadeError):
    """Paired sequences differ in length."""


# --- labeling ---

class NonPositiveThreshold(GlissadeError):
    """Rule threshold must be > 0."""


class Unconverged(GlissadeError):
    """Fit did not converge; sample cannot be built from it."""


# --- classification ---

class SingleClassData(GlissadeError):
    """Training data contains only one class."""


class EmptyData(GlissadeError):
    """Training data is empty."""


class NotTrained(GlissadeError):
    """Predict called before train."""


class NonFiniteFeature(GlissadeError):
    """Query features must all be finite."""


class TooFewSamples(GlissadeError):
    """Not enough samples for the requested fold count."""


# --- generation / CLI ---

class InvalidConfig(GlissadeError):
    """Configuration value violates a precondition."""


class UnknownKind(GlissadeError):
    """Unrecognized export kind."""
