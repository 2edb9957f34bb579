"""Exception types shared across the package."""


class CurveValidationError(ValueError):
    """Bad geometric input: degenerate polyline, parameter out of range, bad file."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class NotSimpleError(RuntimeError):
    """A curve or polyline that must be embedded came within self-intersection range."""


class CriteriaNotMetError(RuntimeError):
    """A certification pipeline finished without meeting its acceptance criteria."""


class InternalInvariantError(RuntimeError):
    """An invariant the implementation is supposed to maintain was observed broken."""
