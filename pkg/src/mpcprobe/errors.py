"""Exception hierarchy shared by every module in the package."""


class MpcProbeError(Exception):
    """Base class for all errors raised by mpcprobe."""


# -- choreography syntax ----------------------------------------------------

class ChoSyntaxError(MpcProbeError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class DuplicateMacro(MpcProbeError):
    pass


class UnknownMacro(MpcProbeError):
    pass


class ArityMismatch(MpcProbeError):
    pass


class RenameOfUndefinedInnerVar(MpcProbeError):
    pass


class ValidationError(MpcProbeError):
    """A program is not a well-formed choreography.

    ``errors`` holds every problem found, the exception itself is the first.
    """

    def __init__(self, message):
        super().__init__(message)
        self.errors = [self]


class CrossPartyExpression(ValidationError):
    pass


class UseBeforeAssign(ValidationError):
    pass


class Reassignment(ValidationError):
    pass


class InvalidSend(ValidationError):
    pass


class BadObliviousTable(ValidationError):
    pass


class UnknownParty(ValidationError):
    pass


class NotExpanded(ValidationError):
    pass


# -- runtime ----------------------------------------------------------------

class TapeExhausted(MpcProbeError):
    pass


class BadCorruptionSet(MpcProbeError):
    pass


class HeaderMismatch(MpcProbeError):
    pass


class NonBitValue(MpcProbeError):
    pass


class RaggedRow(MpcProbeError):
    pass


# -- circuits / mutation ------------------------------------------------------

class UnknownGateKind(MpcProbeError):
    pass


class TopologyViolation(MpcProbeError):
    pass


class NoSuchSite(MpcProbeError):
    pass


class IncompatibleKind(MpcProbeError):
    pass


# -- generation / testing -------------------------------------------------------

class Unsatisfiable(MpcProbeError):
    pass


class FilterTimeout(MpcProbeError):
    pass


class EmptyTrainingSet(MpcProbeError):
    pass


class WidthMismatch(MpcProbeError):
    pass


class InsufficientData(MpcProbeError):
    pass
