"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed data: bad shapes, non-finite values, unparsable files."""


class InvalidConfigError(ValueError):
    """A parameter combination the algorithm cannot run with."""
