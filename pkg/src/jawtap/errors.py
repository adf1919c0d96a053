"""Exception hierarchy shared across the package."""


class JawtapError(Exception):
    """Base class for all package-specific errors."""


class InvariantViolation(JawtapError):
    """A domain object failed one of its structural invariants."""


class RateMismatch(InvariantViolation):
    """Declared sample rate disagrees with sample count / duration."""


class NonMonotonicTimestamps(InvariantViolation):
    """Timestamps are not strictly increasing."""


class OutOfOrderSample(JawtapError):
    """A pushed sample is not newer than the previous one."""


class OutOfOrderInput(JawtapError):
    """A classified event arrived out of time order."""


class UnknownLabel(JawtapError, ValueError):
    """String does not name a valid gesture or noise label."""


class ShapeMismatch(JawtapError, ValueError):
    """Array does not have the required shape."""


class InfeasibleBand(JawtapError):
    """The warping-band constraint admits no alignment path."""


class EmptyTemplates(JawtapError, ValueError):
    """A template bank was built with zero templates."""


class SingleClass(JawtapError, ValueError):
    """Training data contains only one class."""


class ModeMismatch(JawtapError, ValueError):
    """Feature vector mode does not match the model's mode."""


class TruncatedEvent(JawtapError):
    """Detected event center too close to a boundary to crop around."""


class UncalibratedThreshold(JawtapError):
    """Activation threshold requested before calibration."""


class MissingLabelInTrain(JawtapError, ValueError):
    """Test data contains a label with no training template."""


class NoEventsDetected(JawtapError):
    """The pipeline produced no events on the given recording."""
