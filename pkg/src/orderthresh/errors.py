"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class DegenerateDataError(ValueError):
    """Data for which the statistic is undefined (e.g. zero within-group variance)."""


class UnsupportedDesignError(ValueError):
    """The layout is valid data but not a design this library handles."""
