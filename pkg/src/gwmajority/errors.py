"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class TruncationError(RuntimeError):
    """An infinite-support sum could not be truncated within budget."""

    def __init__(self, message, tail_mass):
        super().__init__(f"{message} (residual tail mass {tail_mass:.3e})")
        self.tail_mass = tail_mass


class IdentityViolation(ArithmeticError):
    """An identity or inequality that must hold was found to fail."""


class PreconditionError(ValueError):
    """Inputs do not satisfy the hypotheses a check relies on."""


class NoBracketError(ValueError):
    """A root-finding interval shows no sign change."""
