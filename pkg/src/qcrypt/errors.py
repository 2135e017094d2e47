"""Exception types shared across the package."""


class QcryptError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QcryptError, ValueError):
    """An argument is outside the domain of the operation."""


class NotInvertible(DomainError):
    pass


class NotInSubgroup(QcryptError):
    pass


class NotAResidue(QcryptError):
    pass


class AmbiguousDecryption(QcryptError):
    pass


class DecodeError(QcryptError):
    pass


class IntegrityError(QcryptError):
    pass


class RankError(QcryptError):
    pass


class BoundError(QcryptError):
    pass


class AlgorithmFailure(QcryptError):
    """A randomized algorithm returned FAIL (or ran out of retries)."""


class AttackFailed(AlgorithmFailure):
    pass


class AttackBudgetExceeded(AttackFailed):
    pass
