"""Exception hierarchy shared by the analysis modules.

``DomainError`` marks mathematically legitimate inputs on which the requested
analysis fails (singular linear part, Borel pole on the integration ray, ...).
Input and precondition violations raise plain ``ValueError``/``TypeError`` so
the service and CLI can map the two classes to distinct status codes.
"""


class DomainError(Exception):
    """Analysis failed for a mathematical reason, not a malformed input."""


class SingularDirectionError(DomainError):
    """A pole of the continued Borel transform obstructs the chosen ray."""

    def __init__(self, message: str, pole: complex | None = None):
        super().__init__(message)
        self.pole = pole


class SingularLinearPartError(DomainError):
    """The linear part at the origin is singular; the recursion cannot start."""
