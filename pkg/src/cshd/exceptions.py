"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes of the operands are incompatible."""


class ParameterError(ValueError):
    """A scalar or structural parameter is out of range or malformed."""


class StencilError(RuntimeError):
    """Function evaluation failed at a stencil point."""


class BoundInapplicableError(ValueError):
    """The error-bound hypotheses are violated (W = S .* S lacks full row rank)."""
