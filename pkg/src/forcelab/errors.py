"""Shared exception types."""


class ForcelabError(Exception):
    pass


class BudgetError(ForcelabError):
    """A configured resource budget would be exceeded; work is refused, not degraded."""


class ClosureError(ForcelabError):
    """An input collection is missing required members (subnames or subformulas)."""


class ParseError(ForcelabError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class SeparativityError(ForcelabError):
    def __init__(self, message: str, counterexample=None):
        self.counterexample = counterexample
        super().__init__(message)


class EncodingError(ForcelabError):
    """A set failed to decode as the expected coded object."""
