"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NonConvergence(ArithmeticError):
    """A series or iteration exhausted its term budget."""


class PoleCollision(ArithmeticError):
    """Coincident Gamma-function poles could not be separated."""


class ValidityError(ValueError):
    """The pointing/fading validity condition xi^2 > b is violated.

    Attributes
    ----------
    xi2 : float
        Squared pointing-error parameter.
    shape : float
        The offending mixture shape ``b``.
    branch : int
        Zero-based branch position holding that shape.
    """

    def __init__(self, xi2: float, shape: float, branch: int):
        self.xi2 = xi2
        self.shape = shape
        self.branch = branch
        super().__init__(
            f"validity condition violated: xi^2={xi2:.6g} <= b={shape:.6g} (branch {branch})"
        )
