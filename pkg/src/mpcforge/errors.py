"""Exception hierarchy shared by every mpcforge module."""


class MPCError(Exception):
    pass


class DomainMismatch(MPCError):
    pass


class NotInvertible(MPCError, ZeroDivisionError):
    pass


class DuplicatePoint(MPCError):
    pass


class Overflow(MPCError):
    pass


class ParamError(MPCError, ValueError):
    pass


class ConfigError(ParamError):
    pass


class InsufficientShares(MPCError):
    pass


class InconsistentReplicas(MPCError):
    """Replicated copies of a share disagree; someone tampered with them."""


class SchemeMismatch(MPCError):
    pass


class InsufficientRandomness(MPCError):
    pass


class Abort(MPCError):
    """Honest parties detected cheating and stop (security-with-abort)."""


class InconsistentBroadcast(Abort):
    pass


class TransportFailure(MPCError):
    pass


class TransportTimeout(TransportFailure, TimeoutError):
    pass
