"""Error hierarchy.

Two branches matter to callers: `InputError` (bad input, exit code 2) and
`VerdictError` (a well-posed question with a negative mathematical answer,
exit code 1).
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class PolyanError(Exception):
    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.details}


class InputError(PolyanError):
    exit_code = 2


class VerdictError(PolyanError):
    exit_code = 1


# --- input errors ------------------------------------------------------------


class SingularPoint(InputError):
    pass


class NotRepresentable(InputError):
    pass


class SingularEverywhere(InputError):
    pass


class InsufficientSamples(InputError):
    pass


class GridTooSmall(InputError):
    pass


class DisconnectedDomain(InputError):
    pass


class SolverDivergence(InputError):
    pass


class NotHermitianWithinTolerance(InputError):
    pass


class SingularOnClosure(InputError):
    pass


class IoError(InputError):
    pass


class PreconditionViolation(InputError):
    pass


class ParseError(InputError):
    pass


# --- negative verdicts -------------------------------------------------------


class NoSolution(VerdictError):
    pass


class RankDeficient(VerdictError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        details.setdefault("condition", float("inf"))
        super().__init__(message, details)

    @property
    def condition(self) -> float:
        return self.details["condition"]


class NotHarmonic(VerdictError):
    pass


class MultiplyConnected(VerdictError):
    pass


class TargetUnreachable(VerdictError):
    pass


class NotCqSmooth(VerdictError):
    pass


class SliceViolation(VerdictError):
    pass


class NoPositiveEigenvalue(VerdictError):
    pass


class AttachmentFailure(VerdictError):
    pass


class CoverageFailure(VerdictError):
    pass
