"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input violates a documented invariant (bad manifest, bad mask, bad flag)."""


class DimensionMismatchError(ValidationError):
    """Two masks that must share a shape do not."""


class EmptyGroundTruthError(ValidationError):
    """Ground truth has no foreground pixels, so threshold-based F scores are
    undefined. Raised separately so callers can pick their own convention."""
