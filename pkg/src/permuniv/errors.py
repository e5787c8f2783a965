"""Exception hierarchy shared by every module of the package."""


class PermunivError(Exception):
    """Base class for all errors raised by permuniv."""


class InvariantViolation(PermunivError):
    """A runtime audit found a broken invariant (CLI exit code 2)."""


# perm-core
class NotABijection(PermunivError, ValueError):
    pass


class PatternTooLong(PermunivError, ValueError):
    pass


class KTooLarge(PermunivError, ValueError):
    pass


class DuplicateUniform(PermunivError, ValueError):
    pass


# matrices
class BadPartition(PermunivError, ValueError):
    pass


class TooLarge(PermunivError, ValueError):
    pass


class BadDivisibility(PermunivError, ValueError):
    pass


class EmptyTrialSet(PermunivError, ValueError):
    pass


class MatrixFormatError(PermunivError, ValueError):
    pass


# scanning
class OutOfBounds(PermunivError, IndexError):
    pass


class RowRangeExceeded(PermunivError, ValueError):
    pass


class Infeasible(PermunivError, ValueError):
    pass


# quasirandom
class DeltaOutOfRange(PermunivError, ValueError):
    pass


class NoShift(PermunivError, ValueError):
    pass


class NotInjective(PermunivError, ValueError):
    pass


# structure
class LoopEdge(PermunivError, ValueError):
    pass


class VertexOutsideX(PermunivError, ValueError):
    pass


class BadParameters(PermunivError, ValueError):
    pass


class InvalidSystem(PermunivError, ValueError):
    pass


class ValueOutOfRange(PermunivError, ValueError):
    pass


class DisconnectedRepresentative(PermunivError, ValueError):
    pass


class PreconditionViolated(PermunivError, ValueError):
    pass


class IterationLimit(PermunivError, RuntimeError):
    pass


class InternalInvariant(InvariantViolation):
    pass
