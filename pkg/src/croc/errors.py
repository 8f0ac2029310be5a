"""Exception hierarchy shared across the package."""


class CrocError(Exception):
    """Base class for all errors raised by croc."""


class ValidationError(CrocError, ValueError):
    """Input violates a documented precondition."""


class EnumerationTooLarge(CrocError):
    """An exhaustive enumeration would exceed the configured cap."""

    def __init__(self, what, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what} has {size} elements, which exceeds the enumeration cap "
            f"of {cap}; raise the cap or use Monte Carlo sampling"
        )
