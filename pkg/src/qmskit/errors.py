"""Exception hierarchy shared by all qmskit modules."""


class QmsError(Exception):
    """Base class for all qmskit errors."""


class DimensionMismatch(QmsError):
    """Operands have incompatible shapes."""


class NotHermitian(QmsError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NotNormal(QmsError):
    """A matrix required to be normal is not, within tolerance."""


class NotCommuting(QmsError):
    """A family required to commute has a non-vanishing commutator."""


class NotSimultaneouslyDiagonalizable(QmsError):
    """No common eigenbasis could be found for the given family."""


class InvalidState(QmsError):
    """A density matrix fails Hermiticity/positivity/trace requirements."""


class NotProjector(QmsError):
    """A matrix required to be an orthogonal projector is not."""


class InvalidFamily(QmsError):
    """A projector family violates orthogonality or completeness."""


class NotInvariant(QmsError):
    """A projector expected to be fixed by the semigroup is not."""


class NotDiagonal(QmsError):
    """An operator required to be diagonal (in a given basis) is not."""


class NotMaximallyDephasing(QmsError):
    """The generator does not dephase maximally in any basis."""


class Obstructed(QmsError):
    """A self-adjoint coupling representation does not exist.

    Carries the largest obstruction magnitude and the index triple
    (0-based) at which it is attained.
    """

    def __init__(self, max_delta, argmax):
        self.max_delta = float(max_delta)
        self.argmax = tuple(int(i) for i in argmax)
        super().__init__(
            f"obstruction |Delta|={self.max_delta:.6g} at indices {self.argmax}"
        )


class InvalidModel(QmsError):
    """A classical noise model violates its structural invariants."""


class NotApplicable(QmsError):
    """A check's preconditions do not hold for the given input."""
