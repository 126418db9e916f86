"""Exception hierarchy.

Every error that a scenario may legitimately *expect* derives from
:class:`VerdictError`; the batch runner records its class name as the check
verdict instead of aborting.
"""


class IsolabError(Exception):
    """Base class for all package errors."""


class VerdictError(IsolabError):
    """An error that doubles as a negative verdict.

    ``witness`` holds whatever evidence the raiser collected (elements,
    residuals, parameters) and is serialized into reports.
    """

    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness or {}


# algebra-core
class AlgebraValidationError(VerdictError):
    pass


class NonAssociative(AlgebraValidationError):
    pass


class BadUnit(AlgebraValidationError):
    pass


class NormNotSubmultiplicative(AlgebraValidationError):
    pass


class MissingEmbedding(AlgebraValidationError):
    pass


class AlgebraMismatch(IsolabError):
    pass


# spectral
class NotInvertible(VerdictError):
    pass


class Overflow(IsolabError):
    pass


class UnknownComponentStructure(IsolabError):
    pass


# radical
class RadicalDisagreement(VerdictError):
    pass


# isometry engine
class NoLimit(VerdictError):
    pass


class DomainViolation(VerdictError):
    pass


class SegmentLeavesDomain(VerdictError):
    pass


class NotSymmetric(VerdictError):
    pass


class NotIsometric(VerdictError):
    pass


# classify
class SamplerExhausted(VerdictError):
    pass


class HomomorphismClaimFalse(VerdictError):
    pass


class FlagContradiction(VerdictError):
    pass


class AmbiguousForm(VerdictError):
    pass


class SingularRecoveredU(VerdictError):
    pass


# catalog / cli
class IncompatibleSpec(IsolabError):
    pass


class FixtureSelfCheckFailed(IsolabError):
    pass


class ParseError(IsolabError):
    pass


class UnknownCheck(IsolabError):
    pass
