"""Exceptions and pass/fail values shared across the package.

Every error carries a short machine-readable ``code`` so that the CLI can
emit structured diagnostics instead of tracebacks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class RotaBlueError(Exception):
    """Base class for all package errors."""

    code = "Error"

    def __init__(self, message: str, *, code: str | None = None, index: int | None = None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code
        self.index = index

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.index is not None:
            out["index"] = self.index
        return out


class PatternError(RotaBlueError, ValueError):
    """Malformed cascade pattern text (codes EmptyOrShort, BadChar, EndpointZero, BadScheme)."""

    code = "BadPattern"


class RhoError(RotaBlueError, ValueError):
    """Correlation outside the admissible set (codes RhoZero, RhoOutOfRange)."""

    code = "BadRho"


class ConfigError(RotaBlueError, ValueError):
    code = "InvalidConfig"


class NumericalError(RotaBlueError, ArithmeticError):
    """A numerical step failed or a residual exceeded its tolerance."""

    code = "NumericalFailure"


class NoConvergence(NumericalError):
    code = "NoConvergence"


class OnCriticalInterval(NumericalError):
    code = "OnCriticalInterval"


class ZeroD(NumericalError):
    code = "ZeroD"


class SingularR(NumericalError):
    code = "SingularR"


class RankDeficient(NumericalError):
    code = "RankDeficient"


class InconsistentSystem(NumericalError):
    code = "InconsistentSystem"


class ImaginaryResidue(NumericalError):
    code = "ImaginaryResidue"


class SingularKKT(NumericalError):
    code = "SingularKKT"


class InsufficientHistory(RotaBlueError, ValueError):
    code = "InsufficientHistory"


@dataclass(frozen=True)
class Decision:
    """Outcome of an assumption check. A failure is a value, not an exception."""

    name: str
    passed: bool
    detail: str = ""
    offenders: tuple = ()
    metrics: dict[str, float] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "offenders": [_jsonable(o) for o in self.offenders],
            "metrics": dict(self.metrics),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Decision":
        return cls(
            name=data["name"],
            passed=bool(data["passed"]),
            detail=data.get("detail", ""),
            offenders=tuple(_from_jsonable(o) for o in data.get("offenders", [])),
            metrics=dict(data.get("metrics", {})),
        )


class AssumptionViolation(RotaBlueError):
    """Raised by the end-to-end solver when ASSUMPTION I or II fails.

    ``partial`` holds everything computed up to the failure point so that the
    caller can still report it.
    """

    def __init__(self, decision: Decision, partial: dict[str, Any]):
        super().__init__(f"{decision.name} failed: {decision.detail}", code=f"{decision.name}Failed")
        self.decision = decision
        self.partial = partial


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _from_jsonable(value):
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return complex(value["re"], value["im"])
    return value
