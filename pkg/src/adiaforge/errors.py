"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class GuardError(ValidationError):
    """A size guard was exceeded.

    ``guard`` names the limit that tripped so callers (and the CLI) can report it.
    """

    def __init__(self, guard, message):
        super().__init__(f"[{guard}] {message}")
        self.guard = guard


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its tolerance."""
