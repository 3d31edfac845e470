"""Shared exception types."""


class ParseError(Exception):
    """Instance file is syntactically or semantically invalid."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class SolveTimeout(Exception):
    """A cooperative deadline expired inside a solver loop."""


class BudgetExceededError(Exception):
    """A search exhausted its node budget; the result is inconclusive."""


class InternalInvariantError(Exception):
    """A property the algorithms guarantee was violated; indicates a bug."""
