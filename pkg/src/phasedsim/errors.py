"""Exception types shared across the package."""


class PhasedSimError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(PhasedSimError):
    pass


class SingularMatrix(PhasedSimError):
    pass


class PositionOutOfRange(PhasedSimError):
    pass


class UnknownGate(PhasedSimError):
    pass


class QubitOutOfRange(PhasedSimError):
    pass


class TooManyQubits(PhasedSimError):
    pass


class InvalidAssignment(PhasedSimError):
    pass


class FreeOnNonZeroQubit(PhasedSimError):
    pass


class NonHermitian(PhasedSimError):
    pass


class IdentityExponent(PhasedSimError):
    pass


class NotClifford(PhasedSimError):
    pass


class DecompositionFailure(PhasedSimError):
    pass


class HintNotStabilizer(PhasedSimError):
    pass


class HintCommutes(PhasedSimError):
    pass


class FreeOnEntangledQubit(PhasedSimError):
    pass


class MalformedCondition(PhasedSimError):
    pass


class ResidualEntanglement(PhasedSimError):
    """Raised when an output/auxiliary split is requested across an entangled cut.

    Carries a witness assignment of the random bits exhibiting the entanglement.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class CircuitSyntaxError(PhasedSimError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UndeclaredQubit(CircuitSyntaxError):
    pass


class ForwardOutcomeReference(CircuitSyntaxError):
    pass


class DuplicateRotationLabel(CircuitSyntaxError):
    pass


class RotationCountMismatch(PhasedSimError):
    pass


class OutputArityMismatch(PhasedSimError):
    pass


class NotCanonical(PhasedSimError):
    pass


class TooLarge(PhasedSimError):
    pass
