"""Exception hierarchy shared by all modules."""


class KNumRangeError(Exception):
    """Base class for errors raised by knumrange."""


class DimensionError(KNumRangeError, ValueError):
    """Input matrix has the wrong shape."""


class InputError(KNumRangeError, ValueError):
    """Input values are malformed (non-finite, not Hermitian, ...)."""


class ArgumentError(KNumRangeError, ValueError):
    """A scalar argument is out of its admissible range."""


class DegeneratePencilError(KNumRangeError):
    """b1 = b2 = 0, so every angle is critical."""


class NonExposedDirectionError(KNumRangeError):
    """The level s coincides with an eigenvalue of b_t; the maximizer is not unique."""


class IndeterminateError(KNumRangeError):
    """A numerical rank decision could not be made reliably."""
