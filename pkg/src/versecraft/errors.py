"""Exception hierarchy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class VersecraftError(Exception):
    """Base class for all engine errors."""

    code = "E_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class DuplicateSurfaceError(VersecraftError):
    code = "E_DUPLICATE_SURFACE"


class EmptySurfaceError(VersecraftError):
    code = "E_EMPTY_SURFACE"


class UntokenizableError(VersecraftError):
    code = "E_UNTOKENIZABLE"


class BadTokenIdError(VersecraftError):
    code = "E_BAD_TOKEN_ID"


class BadPositionError(VersecraftError):
    code = "E_BAD_POSITION"


class UnknownTokenError(VersecraftError):
    code = "E_UNKNOWN_TOKEN"


class ProviderFailureError(VersecraftError):
    code = "E_PROVIDER_FAILURE"


class InfiniteEnergyError(VersecraftError):
    code = "E_INFINITE_ENERGY"


class InfeasibleError(VersecraftError):
    """Some position is left with no allowed token."""

    code = "E_INFEASIBLE"

    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(message or f"infeasible at position {position}")


class ConflictingPinsError(VersecraftError):
    code = "E_CONFLICTING_PINS"

    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(message or f"conflicting pins at position {position}")


class EmptyMaskError(VersecraftError):
    code = "E_EMPTY_MASK"


class SpecParseError(VersecraftError):
    """Constraint-spec syntax error, located by 1-based line number."""

    code = "E_PARSE"

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class NoFreePositionsError(VersecraftError):
    code = "E_NO_FREE_POSITIONS"


class TooLargeError(VersecraftError):
    code = "E_TOO_LARGE"


class LengthMismatchError(VersecraftError):
    code = "E_LENGTH_MISMATCH"


class NoSessionError(VersecraftError):
    code = "E_NO_SESSION"

    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"no such session: {session_id}")


class BadTransitionError(VersecraftError):
    code = "E_BAD_TRANSITION"


class LengthChangedError(VersecraftError):
    code = "E_LENGTH_CHANGED"
